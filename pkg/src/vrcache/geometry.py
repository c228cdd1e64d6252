"""
Viewing-direction arithmetic and pairwise viewport overlap.

Directions are (yaw, pitch) pairs in degrees. Yaw wraps around at +-180,
pitch does not. Viewports are yaw-pitch rectangles on the equirectangular
parameterization; a "sliced" viewport ignores pitch entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


def normalize_yaw(yaw: float) -> float:
    """Fold a yaw angle into [-180, 180)."""
    yaw = float(yaw)
    if not math.isfinite(yaw):
        raise ValueError(f"yaw must be finite, got {yaw!r}")
    if abs(yaw) > 1e6:
        yaw = math.fmod(yaw, 360.0)
    while yaw >= 180.0:
        yaw -= 360.0
    while yaw < -180.0:
        yaw += 360.0
    return yaw


def normalize_yaw_array(yaw: np.ndarray) -> np.ndarray:
    """Vectorized `normalize_yaw`."""
    out = np.array(yaw, dtype=float, copy=True, ndmin=1)
    bad = (out < -180.0) | (out >= 180.0)
    if bad.any():
        # in-range values are left untouched so they round-trip exactly
        folded = np.mod(out[bad] + 180.0, 360.0) - 180.0
        folded[folded >= 180.0] -= 360.0
        out[bad] = folded
    return out


def fold_delta(delta):
    """Fold a yaw change into (-180, 180] by adding or subtracting 360."""
    d = np.asarray(delta, dtype=float)
    d = d - 360.0 * np.ceil((d - 180.0) / 360.0)
    if np.ndim(d) == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class Direction:
    yaw_deg: float
    pitch_deg: float = 0.0

    def __post_init__(self):
        pitch = float(self.pitch_deg)
        if not (-90.0 <= pitch <= 90.0):
            raise ValueError(f"pitch {pitch} outside [-90, 90]")
        object.__setattr__(self, "yaw_deg", normalize_yaw(self.yaw_deg))
        object.__setattr__(self, "pitch_deg", pitch)

    def rotated(self, yaw_offset: float) -> "Direction":
        return Direction(self.yaw_deg + yaw_offset, self.pitch_deg)


class _FullSlice:
    """Marker for a viewport spanning the full vertical extent."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FULL_SLICE"

    def __reduce__(self):
        return (_FullSlice, ())


FULL_SLICE = _FullSlice()


@dataclass(frozen=True)
class ViewportSpec:
    width_deg: float
    height_deg: Optional[float] = None  # None means FULL_SLICE

    def __post_init__(self):
        w = float(self.width_deg)
        if not (0.0 < w <= 360.0):
            raise ValueError(f"viewport width {w} outside (0, 360]")
        object.__setattr__(self, "width_deg", w)
        if self.height_deg is FULL_SLICE:
            object.__setattr__(self, "height_deg", None)
        elif self.height_deg is not None:
            h = float(self.height_deg)
            if not (0.0 < h <= 180.0):
                raise ValueError(f"viewport height {h} outside (0, 180]")
            object.__setattr__(self, "height_deg", h)

    @property
    def sliced(self) -> bool:
        return self.height_deg is None

    @property
    def height(self):
        return FULL_SLICE if self.height_deg is None else self.height_deg

    @classmethod
    def parse(cls, text: str) -> "ViewportSpec":
        """Parse the `WxH` / `Wfull` syntax, e.g. ``120x67.5`` or ``90full``."""
        s = text.strip().lower()
        try:
            if s.endswith("full"):
                return cls(float(s[:-4]))
            w, h = s.split("x")
            return cls(float(w), float(h))
        except ValueError as exc:
            raise ValueError(f"bad viewport {text!r}: expected WxH or Wfull") from exc

    def label(self) -> str:
        w = f"{self.width_deg:g}"
        return f"{w}full" if self.sliced else f"{w}x{self.height_deg:g}"


def yaw_difference(a: Direction, b: Direction) -> float:
    d = abs(a.yaw_deg - b.yaw_deg)
    return min(d, 360.0 - d)


def pitch_difference(a: Direction, b: Direction) -> float:
    return abs(a.pitch_deg - b.pitch_deg)


def angular_difference(a: Direction, b: Direction) -> float:
    """Combined yaw/pitch difference, sqrt(dyaw^2 + dpitch^2)."""
    return math.hypot(yaw_difference(a, b), pitch_difference(a, b))


def viewport_overlap(a: Direction, b: Direction, vp: ViewportSpec) -> float:
    """
    Normalized overlap of two equally sized viewports.

    Returns xy/(WH), or x/W for a sliced viewport, where x is the shared yaw
    extent (with wraparound) and y the shared pitch extent (no wraparound).
    """
    x = max(0.0, vp.width_deg - yaw_difference(a, b))
    if vp.sliced:
        return x / vp.width_deg
    y = max(0.0, vp.height_deg - pitch_difference(a, b))
    return (x * y) / (vp.width_deg * vp.height_deg)


# Array versions used by the report runners. Inputs are broadcastable arrays
# of normalized yaw/pitch values.

def yaw_difference_array(yaw_a, yaw_b) -> np.ndarray:
    d = np.abs(np.asarray(yaw_a, dtype=float) - np.asarray(yaw_b, dtype=float))
    return np.minimum(d, 360.0 - d)


def viewport_overlap_array(yaw_a, pitch_a, yaw_b, pitch_b, vp: ViewportSpec) -> np.ndarray:
    x = np.maximum(0.0, vp.width_deg - yaw_difference_array(yaw_a, yaw_b))
    if vp.sliced:
        return x / vp.width_deg
    dp = np.abs(np.asarray(pitch_a, dtype=float) - np.asarray(pitch_b, dtype=float))
    y = np.maximum(0.0, vp.height_deg - dp)
    return (x * y) / (vp.width_deg * vp.height_deg)
