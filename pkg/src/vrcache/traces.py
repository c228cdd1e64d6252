"""
Head-movement traces: parsing, rendering, interpolation and synthesis.

On-disk layout for one video::

    <video_id>/meta.csv          session_id,category
    <video_id>/<session_id>.csv  t_ms,yaw_deg,pitch_deg

Trace rows are sampled at (nominally) 10 ms. Yaw is stored in [-180, 180).
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, List, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .geometry import Direction, fold_delta, normalize_yaw, normalize_yaw_array

log = logging.getLogger(__name__)

CATEGORIES = ("explore", "static", "moving", "rides", "misc")
SAMPLE_MS = 10
HEADER = ("t_ms", "yaw_deg", "pitch_deg")
META_HEADER = ("session_id", "category")


class TraceError(ValueError):
    """Malformed or invalid trace input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"{message}, line {line}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class HeadTrace:
    session_id: str
    video_id: str
    category: str
    t_ms: np.ndarray
    yaw_deg: np.ndarray
    pitch_deg: np.ndarray
    _steps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise TraceError(f"unknown category {self.category!r}")
        t = np.asarray(self.t_ms, dtype=np.int64)
        yaw = normalize_yaw_array(self.yaw_deg)
        pitch = np.asarray(self.pitch_deg, dtype=float)
        if not (t.ndim == yaw.ndim == pitch.ndim == 1 and t.size == yaw.size == pitch.size):
            raise TraceError("t_ms, yaw and pitch must be 1-d and of equal length")
        if t.size == 0:
            raise TraceError("trace has no samples")
        if np.any(np.diff(t) <= 0):
            raise TraceError("non-monotonic timestamp")
        if np.any(np.abs(pitch) > 90.0) or not np.all(np.isfinite(pitch)):
            raise TraceError("pitch outside [-90, 90]")
        for name, arr in (("t_ms", t), ("yaw_deg", yaw), ("pitch_deg", pitch)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        steps = np.append(fold_delta(np.diff(yaw)), 0.0) if t.size > 1 else np.zeros(1)
        steps.setflags(write=False)
        object.__setattr__(self, "_steps", steps)

    def __eq__(self, other):
        if not isinstance(other, HeadTrace):
            return NotImplemented
        return (self.session_id, self.video_id, self.category) == (
            other.session_id, other.video_id, other.category
        ) and all(
            np.array_equal(a, b)
            for a, b in ((self.t_ms, other.t_ms), (self.yaw_deg, other.yaw_deg),
                         (self.pitch_deg, other.pitch_deg))
        )

    def __len__(self):
        return int(self.t_ms.size)

    @property
    def samples(self) -> List[Tuple[int, Direction]]:
        return [(int(t), Direction(y, p)) for t, y, p in zip(self.t_ms, self.yaw_deg, self.pitch_deg)]

    @property
    def last_ms(self) -> int:
        return int(self.t_ms[-1])

    def gaps(self, max_spacing_ms: int = 2 * SAMPLE_MS) -> List[Tuple[int, int]]:
        """Consecutive sample pairs further apart than ``max_spacing_ms``."""
        d = np.diff(self.t_ms)
        idx = np.nonzero(d > max_spacing_ms)[0]
        return [(int(self.t_ms[i]), int(self.t_ms[i + 1])) for i in idx]

    def sample(self, times) -> Tuple[np.ndarray, np.ndarray]:
        """
        Interpolated (yaw, pitch) at each of ``times``.

        Yaw moves along the shorter arc between bracketing samples; a sample
        time returns that sample exactly.
        """
        t = np.asarray(times, dtype=float)
        if t.size and (t.min() < self.t_ms[0] or t.max() > self.t_ms[-1]):
            raise ValueError(
                f"time outside trace span [{self.t_ms[0]}, {self.t_ms[-1]}] ms"
            )
        i = np.searchsorted(self.t_ms, t, side="right") - 1
        i = np.clip(i, 0, self.t_ms.size - 1)
        j = np.minimum(i + 1, self.t_ms.size - 1)
        span = (self.t_ms[j] - self.t_ms[i]).astype(float)
        frac = np.where(span > 0, (t - self.t_ms[i]) / np.where(span > 0, span, 1.0), 0.0)
        yaw = normalize_yaw_array(self.yaw_deg[i] + frac * self._steps[i])
        pitch = self.pitch_deg[i] + frac * (self.pitch_deg[j] - self.pitch_deg[i])
        return yaw, pitch


def sample_at(trace: HeadTrace, t_ms: int) -> Direction:
    yaw, pitch = trace.sample([t_ms])
    return Direction(float(yaw[0]), float(pitch[0]))


def recenter(trace: HeadTrace) -> HeadTrace:
    """Rotate a trace so its first sample looks along yaw 0."""
    return HeadTrace(trace.session_id, trace.video_id, trace.category, trace.t_ms,
                     trace.yaw_deg - trace.yaw_deg[0], trace.pitch_deg)


# -- csv ---------------------------------------------------------------------

def _text(stream) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(bytes(stream).decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def parse_trace(stream, session_id: str = "", video_id: str = "",
                category: str = "misc") -> HeadTrace:
    """
    Read one trace CSV.

    ``stream`` may be a binary or text file object, bytes, or a string.
    Raises `TraceError` carrying the offending line number.
    """
    reader = csv.reader(_text(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise TraceError("empty trace file", 1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise TraceError(f"expected header {','.join(HEADER)}", 1)
    ts, yaws, pitches = [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise TraceError(f"expected 3 fields, got {len(row)}", line)
        try:
            t = int(row[0])
            yaw = float(row[1])
            pitch = float(row[2])
        except ValueError:
            raise TraceError(f"malformed row {','.join(row)!r}", line) from None
        if not (math.isfinite(yaw) and math.isfinite(pitch)):
            raise TraceError("non-finite angle", line)
        if ts and t <= ts[-1]:
            raise TraceError("non-monotonic timestamp", line)
        if not -90.0 <= pitch <= 90.0:
            raise TraceError(f"pitch {pitch} outside [-90, 90]", line)
        ts.append(t)
        yaws.append(normalize_yaw(yaw))
        pitches.append(pitch)
    if not ts:
        raise TraceError("trace has no samples")
    return HeadTrace(session_id, video_id, category, np.array(ts), np.array(yaws), np.array(pitches))


def render_trace(trace: HeadTrace) -> str:
    out = io.StringIO()
    out.write(",".join(HEADER) + "\n")
    for t, y, p in zip(trace.t_ms.tolist(), trace.yaw_deg.tolist(), trace.pitch_deg.tolist()):
        out.write(f"{t},{y!r},{p!r}\n")
    return out.getvalue()


# -- trace sets ---------------------------------------------------------------

@dataclass(frozen=True)
class TraceSet:
    video_id: str
    traces: Tuple[HeadTrace, ...]

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        if not self.traces:
            raise TraceError(f"video {self.video_id!r} has no traces")
        other = {t.video_id for t in self.traces} - {self.video_id}
        if other:
            raise TraceError(f"traces for other videos in set {self.video_id!r}: {sorted(other)}")

    @property
    def common_duration_ms(self) -> int:
        return min(t.last_ms for t in self.traces)

    @property
    def category(self) -> str:
        cats = {t.category for t in self.traces}
        return cats.pop() if len(cats) == 1 else "misc"

    def __len__(self):
        return len(self.traces)

    def grid(self, step_ms: int, end_ms: int | None = None):
        """
        Sample every trace on ``0, step, 2*step, ... <= end``.

        Returns (times, yaw, pitch) with yaw/pitch shaped (n_traces, n_times).
        """
        end = self.common_duration_ms if end_ms is None else end_ms
        times = np.arange(0, end + 1, step_ms, dtype=np.int64)
        yaw = np.empty((len(self.traces), times.size))
        pitch = np.empty_like(yaw)
        for k, tr in enumerate(self.traces):
            yaw[k], pitch[k] = tr.sample(times)
        return times, yaw, pitch


def load_video_dir(path: Union[str, os.PathLike], recenter_yaw: bool = False) -> TraceSet:
    root = Path(path)
    meta = root / "meta.csv"
    video_id = root.name
    traces = []
    with open(meta, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != META_HEADER:
            raise TraceError(f"{meta}: expected header {','.join(META_HEADER)}", 1)
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise TraceError(f"{meta}: expected 2 fields", reader.line_num)
            session, category = row[0].strip(), row[1].strip()
            with open(root / f"{session}.csv", "rb") as tf:
                try:
                    tr = parse_trace(tf, session, video_id, category)
                except TraceError as exc:
                    raise TraceError(f"{root / (session + '.csv')}: {exc}") from None
            gaps = tr.gaps()
            if gaps:
                log.warning("%s/%s: %d sampling gaps > %d ms", video_id, session,
                            len(gaps), 2 * SAMPLE_MS)
            traces.append(recenter(tr) if recenter_yaw else tr)
    return TraceSet(video_id, traces)


def load_traces(path: Union[str, os.PathLike], recenter_yaw: bool = False) -> List[TraceSet]:
    """Load one video directory, or every video directory below ``path``."""
    root = Path(path)
    if (root / "meta.csv").exists():
        return [load_video_dir(root, recenter_yaw)]
    videos = sorted(p for p in root.iterdir() if (p / "meta.csv").exists())
    if not videos:
        raise TraceError(f"no meta.csv under {root}")
    return [load_video_dir(v, recenter_yaw) for v in videos]


def write_trace_set(ts: TraceSet, root: Union[str, os.PathLike]) -> Path:
    vdir = Path(root) / ts.video_id
    vdir.mkdir(parents=True, exist_ok=True)
    with open(vdir / "meta.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(META_HEADER) + "\n")
        for tr in ts.traces:
            fh.write(f"{tr.session_id},{tr.category}\n")
    for tr in ts.traces:
        (vdir / f"{tr.session_id}.csv").write_text(render_trace(tr), encoding="utf-8")
    return vdir


# -- synthesis ----------------------------------------------------------------

UNIFORM_FOLDED_STD = 360.0 / math.sqrt(12.0)
_WINDOW_MS = 10_000


def folded_std(sigma_deg: float, terms: int = 400) -> float:
    """Std of a N(0, sigma) angle after folding into [-180, 180)."""
    if sigma_deg == 0:
        return 0.0
    s = math.radians(sigma_deg)
    k = np.arange(1, terms + 1)
    var = math.pi ** 2 / 3.0 + 4.0 * np.sum((-1.0) ** k * np.exp(-0.5 * (k * s) ** 2) / k ** 2)
    return math.degrees(math.sqrt(max(var, 0.0)))


def unfolded_sigma(target_deg: float) -> float:
    """Invert `folded_std`: the raw std whose folded std is ``target_deg``."""
    if target_deg <= 0:
        return 0.0
    if target_deg >= UNIFORM_FOLDED_STD:
        raise ValueError(
            f"sigma {target_deg} is not reachable; folded std is below {UNIFORM_FOLDED_STD:.2f}"
        )
    if target_deg < 30.0:
        return target_deg  # folding shifts the std by < 1e-6 deg here
    return brentq(lambda s: folded_std(s) - target_deg, target_deg, 5000.0, xtol=1e-10)


def _reflect_pitch(p: np.ndarray) -> np.ndarray:
    m = np.mod(p + 90.0, 360.0)
    return np.where(m <= 180.0, m - 90.0, 270.0 - m)


def synthesize_trace(category_sigma_deg: float, duration_ms: int, seed: int,
                     category: str = "misc", session_id: str = "synthetic",
                     video_id: str = "synthetic") -> HeadTrace:
    """
    Gaussian random-walk head trace at 10 ms resolution.

    The yaw step size is chosen so that yaw displacement over 10 s, folded into
    [-180, 180), has standard deviation ``category_sigma_deg``. Pitch does a
    random walk with a quarter of the yaw step std, reflected at +-90.
    """
    if category_sigma_deg < 0:
        raise ValueError("sigma must be >= 0")
    if duration_ms <= 0:
        raise ValueError("duration must be > 0")
    rng = np.random.default_rng(seed)
    n = duration_ms // SAMPLE_MS + 1
    step = unfolded_sigma(category_sigma_deg) / math.sqrt(_WINDOW_MS / SAMPLE_MS)
    z = rng.standard_normal((2, n - 1))
    yaw = np.concatenate([[0.0], np.cumsum(step * z[0])])
    pitch = _reflect_pitch(np.concatenate([[0.0], np.cumsum(0.25 * step * z[1])]))
    t = np.arange(n, dtype=np.int64) * SAMPLE_MS
    return HeadTrace(session_id, video_id, category, t, yaw, pitch)


def synthesize_trace_set(sigma_deg: float, sessions: int, duration_ms: int, seed: int,
                         category: str = "misc", video_id: str = "synthetic") -> TraceSet:
    seeds = np.random.SeedSequence(seed).generate_state(sessions)
    traces = [
        synthesize_trace(sigma_deg, duration_ms, int(s), category,
                         session_id=f"s{k:03d}", video_id=video_id)
        for k, s in enumerate(seeds)
    ]
    return TraceSet(video_id, traces)
