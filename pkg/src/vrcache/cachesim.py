"""
Trace-driven edge-cache simulation for tiled 360 video.

Each simulated sequence replays a video's sessions in random order through
an initially empty, never-evicting cache. For every client and chunk:

1. a capacity is drawn from the bandwidth model;
2. a yaw prediction error is drawn from N(0, f_psi * sigma);
3. the predicted direction is the client's real yaw at chunk start plus
   that error;
4. tile view probabilities (wrapped normal, std f_n * sigma, centred on the
   prediction) and the capacity go into the tile quality optimizer;
5. every tile selected at a non-zero quality is one request for the object
   (chunk, tile, quality); it hits if any earlier client fetched it.

Hits and requests are tallied by the client's position in the sequence.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bandwidth import BandwidthModel, Constant
from .chunking import ChunkGrid
from .geometry import fold_delta
from .qoe import (DEFAULT_UTILITY, DEFAULT_LADDER, QualityLadder, UtilityParams,
                  optimize_tiles_batch, tile_view_probability_matrix)
from .stats import write_csv
from .traces import HeadTrace, TraceSet

log = logging.getLogger(__name__)

# Yaw-change standard deviations (degrees) per category over 2/5/10 s windows.
SIGMA_TABLE: Dict[str, Dict[int, float]] = {
    "explore": {2: 50.77, 5: 79.85, 10: 94.09},
    "static": {2: 35.94, 5: 46.32, 10: 46.93},
    "moving": {2: 35.77, 5: 48.10, 10: 57.42},
    "rides": {2: 38.94, 5: 50.02, 10: 52.44},
}

CSV_HEADER = ["N", "object_requests", "object_hits", "bytes_requested", "bytes_hit",
              "object_hit_rate", "byte_hit_rate"]


def category_sigma(category: str, window_s: int = 10) -> float:
    try:
        return SIGMA_TABLE[category][window_s]
    except KeyError:
        raise ValueError(
            f"no yaw-change sigma for category {category!r} over {window_s} s; pass sigma explicitly"
        ) from None


@dataclass(frozen=True)
class SimConfig:
    beta: float
    n_tiles: int = 6
    chunk_ms: int = 2000
    f_psi: float = 1.0
    f_n: float = 1.0
    sigma_deg: Optional[float] = None  # None: the traces' category default
    ladder: QualityLadder = DEFAULT_LADDER
    utility: UtilityParams = DEFAULT_UTILITY
    bw: BandwidthModel = field(default_factory=lambda: Constant(12000.0))
    num_sequences: int = 1000
    seed: int = 0
    chunk_count: Optional[int] = None  # None: every whole chunk of the common duration
    workers: int = 1

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")
        if self.n_tiles < 1:
            raise ValueError("n_tiles must be >= 1")
        if self.f_psi < 0 or self.f_n < 0:
            raise ValueError("f_psi and f_n must be >= 0")
        if self.sigma_deg is not None and self.sigma_deg < 0:
            raise ValueError("sigma must be >= 0")
        if self.num_sequences < 1:
            raise ValueError("num_sequences must be >= 1")

    def sigma_for(self, traces: TraceSet) -> float:
        return self.sigma_deg if self.sigma_deg is not None else category_sigma(traces.category)

    def grid_for(self, traces: TraceSet) -> ChunkGrid:
        grid = ChunkGrid.covering(traces.common_duration_ms, self.chunk_ms)
        if self.chunk_count is None:
            return grid
        if self.chunk_count > grid.chunk_count:
            raise ValueError(
                f"{self.chunk_count} chunks of {self.chunk_ms} ms exceed the traces' "
                f"common duration of {traces.common_duration_ms} ms"
            )
        return ChunkGrid(self.chunk_ms, self.chunk_count)


@dataclass
class Tally:
    """Per-position request and hit counters for one or more sequences."""

    requests: np.ndarray
    hits: np.ndarray
    bytes_requested: np.ndarray
    bytes_hit: np.ndarray

    @classmethod
    def zeros(cls, positions: int) -> "Tally":
        z = np.zeros(positions, dtype=np.int64)
        return cls(z.copy(), z.copy(), z.copy(), z.copy())

    def __iadd__(self, other: "Tally") -> "Tally":
        self.requests += other.requests
        self.hits += other.hits
        self.bytes_requested += other.bytes_requested
        self.bytes_hit += other.bytes_hit
        return self


@dataclass
class HitRateCurve:
    tally: Tally
    sequences: int

    @property
    def positions(self) -> int:
        return int(self.tally.requests.size)

    @staticmethod
    def _ratio(num, den) -> np.ndarray:
        return np.divide(num, den, out=np.zeros(num.shape, dtype=float), where=den > 0)

    @property
    def object_hit_rate(self) -> np.ndarray:
        return self._ratio(self.tally.hits, self.tally.requests)

    @property
    def byte_hit_rate(self) -> np.ndarray:
        return self._ratio(self.tally.bytes_hit, self.tally.bytes_requested)

    @property
    def zero_requests(self) -> np.ndarray:
        """Positions whose rates are reported as 0 only because nothing was requested."""
        return self.tally.requests == 0

    def rows(self):
        t = self.tally
        obj, byt = self.object_hit_rate, self.byte_hit_rate
        for n in range(self.positions):
            yield [n, int(t.requests[n]), int(t.hits[n]), int(t.bytes_requested[n]),
                   int(t.bytes_hit[n]), float(obj[n]), float(byt[n])]

    def write_csv(self, path) -> None:
        write_csv(path, CSV_HEADER, self.rows())


class _Prepared:
    """Per-video inputs shared by all sequences."""

    def __init__(self, traces: Sequence[HeadTrace], cfg: SimConfig, sigma: float, grid: ChunkGrid):
        self.cfg = cfg
        self.sigma = sigma
        self.grid = grid
        starts = grid.starts
        self.yaw0 = np.array([tr.sample(starts)[0] for tr in traces]).reshape(len(traces), -1)
        self.rates = np.asarray(cfg.ladder.rates, dtype=np.int64)

    @property
    def clients(self) -> int:
        return self.yaw0.shape[0]


def _sequence_rng(seed: int, ordering_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ordering_id,)))


def _run_order(prep: _Prepared, order: np.ndarray, rng: np.random.Generator) -> Tally:
    cfg = prep.cfg
    clients, chunks, tiles = order.size, prep.grid.chunk_count, cfg.n_tiles
    tally = Tally.zeros(clients)
    if chunks == 0:
        return tally
    capacity = cfg.bw.from_uniform(rng.random((clients, chunks)))
    error = fold_delta(cfg.f_psi * prep.sigma * rng.standard_normal((clients, chunks)))
    predicted = prep.yaw0[order] + error
    probs = tile_view_probability_matrix(predicted.ravel(), cfg.f_n * prep.sigma, tiles)
    budgets = np.floor(capacity.ravel())

    # identical (probabilities, budget) rows give identical selections
    key = np.column_stack([probs, budgets])
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    q = optimize_tiles_batch(uniq[:, :tiles], uniq[:, tiles], cfg.beta, cfg.ladder, cfg.utility)
    q = q[inverse.ravel()].reshape(clients, chunks * tiles)

    # object id = (chunk, tile, quality); flattened in client order
    slot = np.arange(chunks * tiles)[None, :]
    objects = slot * prep.rates.size + q
    fetched = q > 0
    pos = np.broadcast_to(np.arange(clients)[:, None], q.shape)[fetched]
    obj = objects[fetched]
    size = prep.rates[q[fetched]]
    _, first = np.unique(obj, return_index=True)
    hit = np.ones(obj.size, dtype=bool)
    hit[first] = False
    tally.requests += np.bincount(pos, minlength=clients)
    tally.hits += np.bincount(pos[hit], minlength=clients)
    tally.bytes_requested += np.bincount(pos, weights=size, minlength=clients).astype(np.int64)
    tally.bytes_hit += np.bincount(pos[hit], weights=size[hit], minlength=clients).astype(np.int64)
    return tally


def simulate_sequence(ordered_traces: Sequence[HeadTrace], cfg: SimConfig,
                      rng: np.random.Generator, sigma_deg: Optional[float] = None) -> Tally:
    """
    One sequence with clients in the given order; returns per-position tallies.

    ``sigma_deg`` overrides the config's sigma (needed when it is None and the
    traces carry no single category).
    """
    ts = TraceSet(ordered_traces[0].video_id, tuple(ordered_traces))
    sigma = sigma_deg if sigma_deg is not None else cfg.sigma_for(ts)
    prep = _Prepared(ordered_traces, cfg, sigma, cfg.grid_for(ts))
    return _run_order(prep, np.arange(len(ordered_traces)), rng)


def _run_batch(prep: _Prepared, ids: Sequence[int]) -> Tally:
    total = Tally.zeros(prep.clients)
    for i in ids:
        rng = _sequence_rng(prep.cfg.seed, i)
        order = rng.permutation(prep.clients)
        total += _run_order(prep, order, rng)
    return total


def run_simulation(traces: TraceSet, cfg: SimConfig) -> HitRateCurve:
    """Pool tallies over ``cfg.num_sequences`` seeded random orderings."""
    if len(traces) < 2:
        raise ValueError("need at least 2 traces")
    prep = _Prepared(traces.traces, cfg, cfg.sigma_for(traces), cfg.grid_for(traces))
    ids = list(range(cfg.num_sequences))
    if cfg.workers <= 1:
        return HitRateCurve(_run_batch(prep, ids), cfg.num_sequences)
    batches = [ids[k::cfg.workers] for k in range(cfg.workers)]
    total = Tally.zeros(prep.clients)
    with ProcessPoolExecutor(cfg.workers) as pool:
        # integer tallies: the sum does not depend on completion order
        for part in pool.map(_run_batch, [prep] * len(batches), batches):
            total += part
    return HitRateCurve(total, cfg.num_sequences)


SWEEPABLE = ("f_psi", "f_n", "bw_avg")


def sweep(traces: TraceSet, cfg: SimConfig, parameter: str, values: Sequence[float]) -> List[HitRateCurve]:
    """One curve per value; every run reuses ``cfg.seed`` (common random numbers)."""
    if parameter not in SWEEPABLE:
        raise ValueError(f"can only sweep {SWEEPABLE}, not {parameter!r}")
    if not len(values):
        raise ValueError("no sweep values")
    curves = []
    for v in values:
        if parameter == "bw_avg":
            c = dataclasses.replace(cfg, bw=cfg.bw.scaled(float(v)))
        else:
            c = dataclasses.replace(cfg, **{parameter: float(v)})
        curves.append(run_simulation(traces, c))
    return curves
