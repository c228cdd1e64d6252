"""
Randomized viewing-order experiments.

For each random ordering of a video's sessions, the user at position N
(i.e. with N prior users) is compared against the union of the prior users'
yaw arcs: either their instantaneous sliced viewports at the same playback
point, or their per-chunk covers for the same chunk. The overlap is
normalized by the current user's own arc.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .arcs import Arc, ArcSet, covered_length_batch
from .chunking import ChunkGrid, chunk_cover, chunk_extent, cover_arrays, trace_extents
from .geometry import ViewportSpec
from .stats import Cdf, write_cdf, write_csv
from .traces import HeadTrace, TraceSet, sample_at

DEFAULT_POSITIONS = (1, 2, 4, 8, 16)
SEQUENCE_VP = ViewportSpec(90.0)


@dataclass(frozen=True)
class OrderingPlan:
    num_orderings: int = 1000
    seed: int = 0
    session_count: int = 32

    def __post_init__(self):
        if self.num_orderings < 1 or self.session_count < 1:
            raise ValueError("need at least one ordering and one session")

    def ordering(self, ordering_id: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(ordering_id,)))
        return rng.permutation(self.session_count)

    def orderings(self):
        for i in range(self.num_orderings):
            yield i, self.ordering(i)


@dataclass(frozen=True)
class OverlapSample:
    ordering_id: int
    position: int
    when: int  # t_ms (instant mode) or chunk index (chunk mode)
    overlap: float


def _require_sliced(vp: ViewportSpec):
    if not vp.sliced:
        raise ValueError("sequence analysis uses sliced viewports (pitch is ignored)")


def _walk(arcs: Sequence[Arc], ordering_id: int, when: int) -> List[OverlapSample]:
    prior = ArcSet()
    out = []
    for n, arc in enumerate(arcs):
        overlap = prior.intersection_length(arc) / arc.length_deg
        out.append(OverlapSample(ordering_id, n, when, min(1.0, overlap)))
        prior = prior.insert(arc)
    return out


def aggregate_overlap_instant(ordered_traces: Sequence[HeadTrace], t_ms: int,
                              vp: ViewportSpec = SEQUENCE_VP,
                              ordering_id: int = 0) -> List[OverlapSample]:
    _require_sliced(vp)
    arcs = [Arc.centered(sample_at(tr, t_ms).yaw_deg, vp.width_deg) for tr in ordered_traces]
    return _walk(arcs, ordering_id, t_ms)


def aggregate_overlap_chunk(ordered_traces: Sequence[HeadTrace], chunk: int,
                            vp: ViewportSpec = SEQUENCE_VP, chunk_ms: int = 2000,
                            ordering_id: int = 0) -> List[OverlapSample]:
    _require_sliced(vp)
    start = chunk * chunk_ms
    arcs = []
    for tr in ordered_traces:
        box, _ = chunk_cover(chunk_extent(tr, start, chunk_ms), vp, sample_at(tr, start))
        arcs.append(box.yaw_arc)
    return _walk(arcs, ordering_id, chunk)


@dataclass
class SequenceResult:
    mode: str
    times: np.ndarray                   # t_ms of each instant / chunk start
    overlaps: Dict[int, np.ndarray]     # N -> (orderings, times)
    positions: Tuple[int, ...] = field(default=())

    def cdf(self, n: int) -> Cdf:
        return Cdf.from_samples(self.overlaps[n])

    def timeline(self, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        v = self.overlaps[n]
        return self.times, v.mean(axis=0), np.median(v, axis=0)

    def mean(self, n: int) -> float:
        return float(self.overlaps[n].mean())

    def write(self, out_dir, cdf_points=None) -> None:
        for n in self.positions:
            write_cdf(f"{out_dir}/cdf_N{n}.csv", self.cdf(n), cdf_points)
            t, mean, med = self.timeline(n)
            write_csv(f"{out_dir}/timeline_N{n}.csv", ["t_ms", "mean", "median"],
                      zip(t.tolist(), mean.tolist(), med.tolist()))


def user_arcs(traces: TraceSet, mode: str, vp: ViewportSpec, granularity_ms: int = 50,
              chunk_ms: int = 2000) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-user yaw arcs for every evaluation point.

    Returns (times, starts, lengths) with starts/lengths shaped (users, points).
    """
    _require_sliced(vp)
    if mode == "instant":
        times, yaw, _ = traces.grid(granularity_ms)
        starts = np.mod(yaw - vp.width_deg / 2.0, 360.0)
        return times, starts, np.full_like(starts, vp.width_deg)
    if mode == "chunk":
        grid = ChunkGrid.for_traces(traces, chunk_ms)
        times = grid.starts
        starts, lengths = [], []
        for tr in traces.traces:
            yaw0, pitch0 = tr.sample(times)
            s, l, *_ = cover_arrays(trace_extents(tr, grid), yaw0, pitch0, vp)
            starts.append(s)
            lengths.append(l)
        return times, np.array(starts).reshape(len(traces), -1), np.array(lengths).reshape(len(traces), -1)
    raise ValueError(f"unknown mode {mode!r}; expected 'instant' or 'chunk'")


def run_sequence_experiment(traces: TraceSet, plan: OrderingPlan, mode: str = "instant",
                            granularity_ms: int = 50, vp: ViewportSpec = SEQUENCE_VP,
                            chunk_ms: int = 2000,
                            positions: Sequence[int] = DEFAULT_POSITIONS) -> SequenceResult:
    """
    Overlap with the aggregate cover of N prior users, over many orderings.

    Only the positions in ``positions`` are evaluated; those not smaller than
    the number of sessions are dropped with a warning.
    """
    if len(traces) < 2:
        raise ValueError("need at least 2 traces")
    if plan.session_count != len(traces):
        raise ValueError(f"plan covers {plan.session_count} sessions, trace set has {len(traces)}")
    kept = tuple(sorted({int(n) for n in positions if 0 <= n < len(traces)}))
    dropped = sorted({int(n) for n in positions} - set(kept))
    if dropped:
        warnings.warn(f"positions {dropped} need more than {len(traces)} sessions; dropped",
                      stacklevel=2)
    times, starts, lengths = user_arcs(traces, mode, vp, granularity_ms, chunk_ms)
    overlaps = {n: np.empty((plan.num_orderings, times.size)) for n in kept}
    for i, order in plan.orderings():
        for n in kept:
            user, prior = order[n], order[:n]
            covered = covered_length_batch(starts[prior], lengths[prior], starts[user], lengths[user])
            overlaps[n][i] = np.minimum(1.0, covered / lengths[user])
    return SequenceResult(mode, times, overlaps, kept)
