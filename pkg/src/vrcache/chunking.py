"""
Per-chunk head movement: directional extents, the direction-change bound,
per-chunk viewport covers and their pairwise overlap.

Extents are accumulated over the 10 ms interpolated grid starting at the
chunk's first playback instant. Each 10 ms yaw change is folded into
(-180, 180] before it is summed, so crossing the +-180 seam counts as a
small move rather than a near-full turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .arcs import Arc, covered_length_batch
from .geometry import Direction, ViewportSpec, fold_delta
from .traces import SAMPLE_MS, HeadTrace, TraceSet


@dataclass(frozen=True)
class ChunkGrid:
    duration_ms: int = 2000
    chunk_count: int = 0

    def __post_init__(self):
        if self.duration_ms <= 0 or self.duration_ms % SAMPLE_MS:
            raise ValueError(f"chunk duration must be a positive multiple of {SAMPLE_MS} ms")
        if self.chunk_count < 0:
            raise ValueError("chunk_count must be >= 0")

    @classmethod
    def covering(cls, common_duration_ms: int, duration_ms: int = 2000) -> "ChunkGrid":
        """As many whole chunks as fit in ``common_duration_ms``."""
        return cls(duration_ms, common_duration_ms // duration_ms)

    @classmethod
    def for_traces(cls, traces: TraceSet, duration_ms: int = 2000) -> "ChunkGrid":
        return cls.covering(traces.common_duration_ms, duration_ms)

    def start(self, k: int) -> int:
        return k * self.duration_ms

    @property
    def starts(self) -> np.ndarray:
        return np.arange(self.chunk_count, dtype=np.int64) * self.duration_ms

    @property
    def span_ms(self) -> int:
        return self.chunk_count * self.duration_ms


@dataclass(frozen=True)
class DirectionalExtent:
    psi_minus: float = 0.0
    psi_plus: float = 0.0
    theta_minus: float = 0.0
    theta_plus: float = 0.0

    def __post_init__(self):
        if min(self.psi_minus, self.psi_plus, self.theta_minus, self.theta_plus) < 0:
            raise ValueError("directional extents must be non-negative")

    @property
    def yaw_span(self) -> float:
        return self.psi_minus + self.psi_plus

    @property
    def pitch_span(self) -> float:
        return self.theta_minus + self.theta_plus


def _prefix_extremes(deltas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(-min, max) of running sums along the last axis, floored at 0."""
    if deltas.shape[-1] == 0:
        z = np.zeros(deltas.shape[:-1])
        return z, z.copy()
    run = np.cumsum(deltas, axis=-1)
    return np.maximum(0.0, -run.min(axis=-1)), np.maximum(0.0, run.max(axis=-1))


def chunk_extent_samples(yaw: np.ndarray, pitch: np.ndarray) -> np.ndarray:
    """
    Extents for chunks given their 10 ms samples.

    ``yaw`` and ``pitch`` have shape (..., m): m samples per chunk. Returns
    (..., 4) with columns psi_minus, psi_plus, theta_minus, theta_plus.
    """
    dy = fold_delta(np.diff(yaw, axis=-1))
    dp = np.diff(pitch, axis=-1)
    pm, pp = _prefix_extremes(np.asarray(dy))
    tm, tp = _prefix_extremes(dp)
    return np.stack([pm, pp, tm, tp], axis=-1)


def chunk_extent(trace: HeadTrace, start_ms: int, duration_ms: int = 2000) -> DirectionalExtent:
    """Directional extent of one chunk ``[start_ms, start_ms + duration_ms)``."""
    if duration_ms <= 0:
        raise ValueError("duration must be > 0")
    times = np.arange(start_ms, start_ms + duration_ms, SAMPLE_MS)
    yaw, pitch = trace.sample(times)
    return DirectionalExtent(*chunk_extent_samples(yaw, pitch).tolist())


def trace_extents(trace: HeadTrace, grid: ChunkGrid) -> np.ndarray:
    """(chunk_count, 4) extents for every chunk of ``grid``."""
    per = grid.duration_ms // SAMPLE_MS
    if grid.chunk_count == 0:
        return np.zeros((0, 4))
    times = np.arange(0, grid.span_ms, SAMPLE_MS)
    yaw, pitch = trace.sample(times)
    return chunk_extent_samples(yaw.reshape(-1, per), pitch.reshape(-1, per))


def direction_change_bound(e: DirectionalExtent, yaw_only: bool = False) -> float:
    if yaw_only:
        return e.yaw_span
    return math.hypot(e.yaw_span, e.pitch_span)


def direction_change_bound_array(extents: np.ndarray, yaw_only: bool = False) -> np.ndarray:
    yaw = extents[..., 0] + extents[..., 1]
    if yaw_only:
        return yaw
    return np.hypot(yaw, extents[..., 2] + extents[..., 3])


@dataclass(frozen=True)
class CoverBox:
    yaw_arc: Arc
    pitch_span: Optional[Tuple[float, float]]  # None for sliced viewports
    vp: ViewportSpec

    @property
    def width(self) -> float:
        return self.yaw_arc.length_deg

    @property
    def height(self) -> Optional[float]:
        if self.pitch_span is None:
            return None
        return self.pitch_span[1] - self.pitch_span[0]

    @property
    def area(self) -> float:
        return self.width if self.pitch_span is None else self.width * self.height

    @property
    def normalized_size(self) -> float:
        if self.pitch_span is None:
            return self.width / self.vp.width_deg
        return self.area / (self.vp.width_deg * self.vp.height_deg)


def max_normalized_cover(vp: ViewportSpec) -> float:
    if vp.sliced:
        return 360.0 / vp.width_deg
    return (360.0 * 180.0) / (vp.width_deg * vp.height_deg)


def _pitch_span(theta0, theta_minus, theta_plus, h):
    """Pitch cover, slid back inside [-90, 90] so its height is preserved."""
    height = np.minimum(180.0, h + theta_minus + theta_plus)
    lo = theta0 - h / 2.0 - theta_minus
    lo = np.clip(lo, -90.0, 90.0 - height)
    return lo, lo + height


def chunk_cover(e: DirectionalExtent, vp: ViewportSpec, start: Direction) -> Tuple[CoverBox, float]:
    """
    Bounding box of the viewport over one chunk.

    The chunk-start viewport is stretched left by psi_minus, right by
    psi_plus, and likewise in pitch, with each axis capped at the full
    circle / full height. Returns the box and its size relative to the
    viewport.
    """
    w = vp.width_deg
    arc = Arc(start.yaw_deg - w / 2.0 - e.psi_minus, min(360.0, w + e.yaw_span))
    if vp.sliced:
        box = CoverBox(arc, None, vp)
    else:
        lo, hi = _pitch_span(start.pitch_deg, e.theta_minus, e.theta_plus, vp.height_deg)
        box = CoverBox(arc, (float(lo), float(hi)), vp)
    return box, box.normalized_size


def cover_arrays(extents: np.ndarray, yaw0: np.ndarray, pitch0: np.ndarray, vp: ViewportSpec):
    """
    Vectorized `chunk_cover`.

    Returns (arc_start, arc_length, pitch_lo, pitch_hi, normalized_size);
    the pitch arrays are None for sliced viewports.
    """
    w = vp.width_deg
    length = np.minimum(360.0, w + extents[..., 0] + extents[..., 1])
    start = np.mod(yaw0 - w / 2.0 - extents[..., 0], 360.0)
    if vp.sliced:
        return start, length, None, None, length / w
    h = vp.height_deg
    lo, hi = _pitch_span(pitch0, extents[..., 2], extents[..., 3], h)
    return start, length, lo, hi, length * (hi - lo) / (w * h)


def normalized_cover_size(e: DirectionalExtent, vp: ViewportSpec) -> float:
    size = min(360.0, vp.width_deg + e.yaw_span) / vp.width_deg
    if not vp.sliced:
        size *= min(180.0, vp.height_deg + e.pitch_span) / vp.height_deg
    return size


def pairwise_cover_overlap(a: CoverBox, b: CoverBox) -> Tuple[float, float]:
    """
    Overlap of two per-chunk covers, seen from user A.

    Returns (overlap / area of A's box, overlap / viewport area).
    """
    if a.vp != b.vp:
        raise ValueError("cover boxes must come from the same viewport")
    x = float(covered_length_batch([[b.yaw_arc.start_deg]], [[b.yaw_arc.length_deg]],
                                   [a.yaw_arc.start_deg], [a.yaw_arc.length_deg])[0])
    vp = a.vp
    if a.pitch_span is None:
        return x / a.width, x / vp.width_deg
    y = max(0.0, min(a.pitch_span[1], b.pitch_span[1]) - max(a.pitch_span[0], b.pitch_span[0]))
    return (x * y) / a.area, (x * y) / (vp.width_deg * vp.height_deg)


def pairwise_cover_overlap_arrays(a, b, vp: ViewportSpec):
    """
    Vectorized `pairwise_cover_overlap` on `cover_arrays` tuples.

    ``a`` and ``b`` are (start, length, lo, hi) array tuples of equal shape.
    """
    a_start, a_len, a_lo, a_hi = a
    b_start, b_len, b_lo, b_hi = b
    a_start, a_len, b_start, b_len = np.broadcast_arrays(a_start, a_len, b_start, b_len)
    shape = a_start.shape
    x = covered_length_batch(np.ravel(b_start)[None, :], np.ravel(b_len)[None, :],
                             np.ravel(a_start), np.ravel(a_len)).reshape(shape)
    if vp.sliced:
        return x / a_len, x / vp.width_deg
    y = np.maximum(0.0, np.minimum(a_hi, b_hi) - np.maximum(a_lo, b_lo))
    return x * y / (a_len * (a_hi - a_lo)), x * y / (vp.width_deg * vp.height_deg)
