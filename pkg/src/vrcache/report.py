"""
Pairwise and per-chunk similarity reports.

Both runners enumerate session pairs of one video over its common duration
and reduce the per-pair series to CDFs, box statistics and timelines. Output
is CSV only.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .chunking import (ChunkGrid, cover_arrays, direction_change_bound_array,
                       pairwise_cover_overlap_arrays, trace_extents)
from .geometry import ViewportSpec, viewport_overlap_array, yaw_difference_array
from .stats import PERCENTILE_RULE, BoxStats, Cdf, write_cdf, write_csv
from .traces import TraceSet

METRICS = ("angle", "yaw", "pitch", "overlap")


def pair_indices(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """All unordered pairs (i < j) of n sessions, in lexicographic order."""
    if n < 2:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    i, j = np.array(list(combinations(range(n), 2))).T
    return i, j


def pairwise_values(yaw: np.ndarray, pitch: np.ndarray, metric: str,
                    vp: Optional[ViewportSpec] = None) -> np.ndarray:
    """
    Metric for every unordered pair at every instant.

    ``yaw`` and ``pitch`` are (sessions, instants); the result is (pairs, instants).
    """
    i, j = pair_indices(yaw.shape[0])
    if metric == "yaw":
        return yaw_difference_array(yaw[i], yaw[j])
    if metric == "pitch":
        return np.abs(pitch[i] - pitch[j])
    if metric == "angle":
        return np.hypot(yaw_difference_array(yaw[i], yaw[j]), pitch[i] - pitch[j])
    if metric == "overlap":
        if vp is None:
            raise ValueError("the overlap metric needs a viewport")
        return viewport_overlap_array(yaw[i], pitch[i], yaw[j], pitch[j], vp)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass
class PairwiseReport:
    metric: str
    times: np.ndarray
    values: np.ndarray          # (pairs, instants)

    @property
    def pairs(self) -> int:
        return int(self.values.shape[0])

    @property
    def pair_means(self) -> np.ndarray:
        return self.values.mean(axis=1)

    @property
    def all_instants(self) -> Cdf:
        return Cdf.from_samples(self.values)

    @property
    def per_pair(self) -> Cdf:
        return Cdf.from_samples(self.pair_means)

    @property
    def box(self) -> BoxStats:
        return BoxStats.from_samples(self.pair_means)

    @property
    def timeline(self) -> np.ndarray:
        return self.values.mean(axis=0)

    def write(self, out_dir, cdf_points: Optional[int] = None) -> None:
        out = Path(out_dir)
        write_cdf(out / f"{self.metric}_cdf_all.csv", self.all_instants, cdf_points)
        write_cdf(out / f"{self.metric}_cdf_pair_mean.csv", self.per_pair, cdf_points)
        write_csv(out / f"{self.metric}_box.csv", BoxStats.header(), [self.box.row()],
                  comment=f"percentiles: {PERCENTILE_RULE}")
        write_csv(out / f"{self.metric}_timeline.csv", ["t_ms", "pair_mean"],
                  zip(self.times.tolist(), self.timeline.tolist()))


def pairwise_report(traces: TraceSet, metric: str, vp: Optional[ViewportSpec] = None,
                    granularity_ms: int = 50) -> PairwiseReport:
    """Compare every session pair at every ``granularity_ms`` instant."""
    if len(traces) < 2:
        raise ValueError("need at least 2 traces")
    if granularity_ms <= 0:
        raise ValueError("granularity must be > 0")
    times, yaw, pitch = traces.grid(granularity_ms)
    return PairwiseReport(metric, times, pairwise_values(yaw, pitch, metric, vp))


@dataclass
class ChunkReport:
    chunk_ms: int
    vp: ViewportSpec
    bound: np.ndarray           # (sessions, chunks), yaw and pitch
    bound_yaw: np.ndarray       # (sessions, chunks), yaw only
    cover: np.ndarray           # (sessions, chunks), normalized cover size
    overlap_box: np.ndarray     # (ordered pairs, chunks), relative to A's cover
    overlap_vp: np.ndarray      # (ordered pairs, chunks), relative to the viewport

    def cdfs(self) -> Dict[str, Cdf]:
        return {
            "bound": Cdf.from_samples(self.bound),
            "bound_yaw": Cdf.from_samples(self.bound_yaw),
            "cover": Cdf.from_samples(self.cover),
            "overlap_cover": Cdf.from_samples(self.overlap_box),
            "overlap_viewport": Cdf.from_samples(self.overlap_vp),
        }

    @property
    def cover_box(self) -> BoxStats:
        return BoxStats.from_samples(self.cover)

    @property
    def bound_box(self) -> BoxStats:
        return BoxStats.from_samples(self.bound)

    def write(self, out_dir, cdf_points: Optional[int] = None, omit_extremes: bool = False) -> None:
        out = Path(out_dir)
        tag = f"{self.chunk_ms}ms"
        for name, cdf in self.cdfs().items():
            write_cdf(out / f"{name}_cdf_{tag}.csv", cdf, cdf_points)
        write_csv(out / f"box_{tag}.csv", ["quantity"] + BoxStats.header(),
                  [["bound"] + self.bound_box.row(),
                   ["cover"] + self.cover_box.row(omit_extremes)],
                  comment=f"percentiles: {PERCENTILE_RULE}")


def chunk_report(traces: TraceSet, vp: ViewportSpec, chunk_ms: int = 2000) -> ChunkReport:
    """
    Per-chunk movement bounds, cover sizes and pairwise cover overlaps.

    Cover overlaps are directional (A's cover against B's), so every ordered
    pair of distinct sessions contributes.
    """
    if len(traces) < 2:
        raise ValueError("need at least 2 traces")
    grid = ChunkGrid.for_traces(traces, chunk_ms)
    if grid.chunk_count == 0:
        raise ValueError(f"traces are shorter than one {chunk_ms} ms chunk")
    ext, covers = [], []
    for tr in traces.traces:
        e = trace_extents(tr, grid)
        yaw0, pitch0 = tr.sample(grid.starts)
        ext.append(e)
        covers.append(cover_arrays(e, yaw0, pitch0, vp))
    ext = np.stack(ext)
    start, length, lo, hi, size = (None if covers[0][k] is None else np.stack([c[k] for c in covers])
                                   for k in range(5))
    n = len(traces)
    a, b = np.array([(i, j) for i in range(n) for j in range(n) if i != j]).T

    def pick(idx):
        return (start[idx], length[idx],
                None if lo is None else lo[idx], None if hi is None else hi[idx])

    rel_box, rel_vp = pairwise_cover_overlap_arrays(pick(a), pick(b), vp)
    return ChunkReport(chunk_ms, vp, direction_change_bound_array(ext),
                       direction_change_bound_array(ext, yaw_only=True), size, rel_box, rel_vp)
