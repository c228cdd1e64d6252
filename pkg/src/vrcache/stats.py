"""Summary statistics and CSV emission shared by the report runners."""

from __future__ import annotations

import csv
import os
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

# Percentiles interpolate linearly between order statistics (numpy's
# default "linear" method); this is written into every CSV header comment.
PERCENTILE_RULE = "linear interpolation between order statistics"


def percentile(samples, q: float) -> float:
    a = np.asarray(samples, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("no samples")
    return float(np.percentile(a, q, method="linear"))


@dataclass(frozen=True)
class BoxStats:
    min: float
    p25: float
    median: float
    p75: float
    max: float
    mean: float

    @classmethod
    def from_samples(cls, samples) -> "BoxStats":
        a = np.asarray(samples, dtype=float).ravel()
        if a.size == 0:
            raise ValueError("no samples")
        q = np.percentile(a, [0, 25, 50, 75, 100], method="linear")
        mean = float(np.clip(a.mean(), q[0], q[4]))
        return cls(*(float(x) for x in q), mean)

    def row(self, omit_extremes: bool = False) -> list:
        """Values in field order; min/max blanked when ``omit_extremes``."""
        vals = list(astuple(self))
        if omit_extremes:
            vals[0] = vals[4] = ""
        return vals

    @staticmethod
    def header() -> list:
        return [f.name for f in fields(BoxStats)]


class Cdf:
    """Empirical CDF: sorted distinct values and the fraction of samples <= each."""

    def __init__(self, values: np.ndarray, fractions: np.ndarray, count: int):
        self.values = values
        self.fractions = fractions
        self.count = count

    @classmethod
    def from_samples(cls, samples) -> "Cdf":
        a = np.sort(np.asarray(samples, dtype=float).ravel())
        if a.size == 0:
            raise ValueError("no samples")
        values, counts = np.unique(a, return_counts=True)
        return cls(values, np.cumsum(counts) / a.size, int(a.size))

    def __len__(self):
        return int(self.values.size)

    def at(self, x: float) -> float:
        """Fraction of samples <= x."""
        i = np.searchsorted(self.values, x, side="right")
        return 0.0 if i == 0 else float(self.fractions[i - 1])

    def thinned(self, max_points: Optional[int]) -> "Cdf":
        """Keep at most ``max_points`` evenly spaced points, always including the last."""
        if not max_points or len(self) <= max_points:
            return self
        idx = np.unique(np.linspace(0, len(self) - 1, max_points).round().astype(int))
        return Cdf(self.values[idx], self.fractions[idx], self.count)

    def rows(self):
        return zip(self.values.tolist(), self.fractions.tolist())


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Union[str, os.PathLike], header: Sequence[str], rows: Iterable[Sequence],
              comment: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_cdf(path, cdf: Cdf, max_points: Optional[int] = None, value_name: str = "value") -> Path:
    return write_csv(path, [value_name, "cumulative_fraction"], cdf.thinned(max_points).rows())
