"""
Per-chunk capacity distributions.

Three variants share one interface: an empirical sample set (drawn
uniformly with replacement), a three-level synthetic model, and a constant.
All of them are driven by one uniform variate per draw, so runs that differ
only in the model see common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .qoe import DEFAULT_LADDER, QualityLadder


class BandwidthModel:
    avg: float

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def scaled(self, target_avg: float) -> "BandwidthModel":
        raise NotImplementedError

    def draw(self, rng: np.random.Generator) -> float:
        return float(self.from_uniform(rng.random(1))[0])

    def draw_many(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.from_uniform(rng.random(size))


def _check_avg(avg: float):
    if not (avg > 0 and math.isfinite(avg)):
        raise ValueError(f"average bandwidth must be positive, got {avg}")


@dataclass(frozen=True)
class Constant(BandwidthModel):
    avg: float

    def __post_init__(self):
        _check_avg(self.avg)

    def from_uniform(self, u):
        return np.full(np.shape(u), float(self.avg))

    def scaled(self, target_avg):
        return Constant(target_avg)


@dataclass(frozen=True)
class ThreeLevel(BandwidthModel):
    """avg with probability 0.4, 2*avg with 0.2, avg/2 with 0.4."""

    avg: float

    def __post_init__(self):
        _check_avg(self.avg)

    @property
    def levels(self) -> Tuple[Tuple[float, float], ...]:
        return ((2.0 * self.avg, 0.2), (self.avg, 0.4), (0.5 * self.avg, 0.4))

    def from_uniform(self, u):
        u = np.asarray(u)
        return np.where(u < 0.2, 2.0 * self.avg, np.where(u < 0.6, self.avg, 0.5 * self.avg))

    def scaled(self, target_avg):
        return ThreeLevel(target_avg)


@dataclass(frozen=True, eq=False)
class Empirical(BandwidthModel):
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("need a non-empty 1-d sample list")
        if np.any(~np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("bandwidth samples must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def avg(self) -> float:
        return float(self.samples.mean())

    def from_uniform(self, u):
        idx = np.minimum((np.asarray(u) * self.samples.size).astype(np.int64), self.samples.size - 1)
        return self.samples[idx]

    def scaled(self, target_avg):
        _check_avg(target_avg)
        return Empirical(self.samples * (target_avg / self.samples.mean()))


def load_samples(stream) -> List[float]:
    """One positive decimal per line."""
    if isinstance(stream, (bytes, bytearray)):
        text = bytes(stream).decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        try:
            v = float(line)
        except ValueError:
            raise ValueError(f"line {n}: not a number: {line!r}") from None
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"line {n}: bandwidth must be positive, got {line!r}")
        out.append(v)
    if not out:
        raise ValueError("no bandwidth samples")
    return out


def scale_to_average(model: BandwidthModel, target_avg: float) -> BandwidthModel:
    _check_avg(target_avg)
    return model.scaled(target_avg)


def draw(model: BandwidthModel, rng: np.random.Generator) -> float:
    return model.draw(rng)


def normalized_bandwidth(model, ladder: QualityLadder = DEFAULT_LADDER, n_tiles: int = 6) -> float:
    """Average bandwidth relative to what all tiles at top quality need."""
    avg = model if isinstance(model, (int, float)) else model.avg
    _check_avg(avg)
    return avg / (ladder.max_rate * n_tiles)


def parse_bw(spec: str, avg: float) -> BandwidthModel:
    """Build a model from ``constant``, ``three-level`` or ``file:<path>``."""
    if spec == "constant":
        return Constant(avg)
    if spec == "three-level":
        return ThreeLevel(avg)
    if spec.startswith("file:"):
        with open(spec[5:], "rb") as fh:
            return scale_to_average(Empirical(load_samples(fh)), avg)
    raise ValueError(f"unknown bandwidth model {spec!r}")
