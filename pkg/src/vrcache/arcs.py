"""
Disjoint unions of yaw arcs on the 360 degree circle.

Arcs are half-open, ``[start, start + length)``, with ``start`` in [0, 360).
An arc may run past 360; it then continues from 0. `ArcSet` keeps its arcs
merged, non-touching and sorted by start, so two sets covering the same
part of the circle compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

CIRCLE = 360.0
ADJACENCY_TOL = 1e-9


@dataclass(frozen=True)
class Arc:
    start_deg: float
    length_deg: float

    def __post_init__(self):
        length = float(self.length_deg)
        if not (0.0 < length <= CIRCLE):
            raise ValueError(f"arc length {length} outside (0, 360]")
        start = float(self.start_deg) % CIRCLE
        if start >= CIRCLE:  # float rounding of tiny negatives
            start = 0.0
        if length == CIRCLE:
            start = 0.0
        object.__setattr__(self, "start_deg", start)
        object.__setattr__(self, "length_deg", length)

    @classmethod
    def centered(cls, center_deg: float, width_deg: float) -> "Arc":
        return cls(center_deg - width_deg / 2.0, width_deg)

    @property
    def end_deg(self) -> float:
        """End on the unrolled line; may exceed 360."""
        return self.start_deg + self.length_deg

    @property
    def is_full(self) -> bool:
        return self.length_deg >= CIRCLE

    def pieces(self) -> List[Tuple[float, float]]:
        """The arc as one or two linear intervals inside [0, 360)."""
        if self.is_full:
            return [(0.0, CIRCLE)]
        end = self.end_deg
        if end <= CIRCLE + ADJACENCY_TOL:  # absorbs rounding of start + length
            return [(self.start_deg, min(end, CIRCLE))]
        return [(self.start_deg, CIRCLE), (0.0, end - CIRCLE)]


def _merge_pieces(pieces: Iterable[Tuple[float, float]]) -> List[Tuple[float, float]]:
    merged: List[List[float]] = []
    for lo, hi in sorted(pieces):
        if merged and lo <= merged[-1][1] + ADJACENCY_TOL:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _arcs_from_pieces(pieces: List[Tuple[float, float]]) -> Tuple[Arc, ...]:
    if not pieces:
        return ()
    if len(pieces) == 1 and pieces[0][0] <= ADJACENCY_TOL and pieces[0][1] >= CIRCLE - ADJACENCY_TOL:
        return (Arc(0.0, CIRCLE),)
    # join the piece touching 360 with the one starting at 0
    if len(pieces) > 1 and pieces[0][0] <= ADJACENCY_TOL and pieces[-1][1] >= CIRCLE - ADJACENCY_TOL:
        head = pieces[0]
        tail = pieces[-1]
        wrapped = Arc(tail[0], (CIRCLE - tail[0]) + head[1])
        rest = [Arc(lo, hi - lo) for lo, hi in pieces[1:-1]]
        return tuple(rest + [wrapped])
    return tuple(Arc(lo, hi - lo) for lo, hi in pieces)


@dataclass(frozen=True)
class ArcSet:
    """
    Union of arcs, stored as merged linear spans inside [0, 360].

    An arc crossing 0 is kept as two spans, one ending at 360 and one
    starting at 0; `arcs` rejoins them. Keeping spans rather than arcs means
    repeated inserts only ever copy existing endpoints, so the canonical form
    does not drift with rounding.
    """

    spans: Tuple[Tuple[float, float], ...] = ()

    @classmethod
    def of(cls, *arcs: Arc) -> "ArcSet":
        return cls(tuple(_merge_pieces(p for a in arcs for p in a.pieces())))

    @property
    def arcs(self) -> Tuple[Arc, ...]:
        return _arcs_from_pieces(list(self.spans))

    def pieces(self) -> List[Tuple[float, float]]:
        return list(self.spans)

    def insert(self, arc: Arc) -> "ArcSet":
        return ArcSet(tuple(_merge_pieces(self.pieces() + arc.pieces())))

    def intersection_length(self, arc: Arc) -> float:
        total = 0.0
        for alo, ahi in arc.pieces():
            for lo, hi in self.spans:
                overlap = min(ahi, hi) - max(alo, lo)
                if overlap > 0.0:
                    total += overlap
        return total

    def total_length(self) -> float:
        return min(CIRCLE, sum(hi - lo for lo, hi in self.spans))

    @property
    def is_full(self) -> bool:
        return self.total_length() >= CIRCLE - ADJACENCY_TOL

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)


EMPTY = ArcSet()


def insert(arc_set: ArcSet, arc: Arc) -> ArcSet:
    return arc_set.insert(arc)


def intersection_length(arc_set: ArcSet, arc: Arc) -> float:
    return arc_set.intersection_length(arc)


def total_length(arc_set: ArcSet) -> float:
    return arc_set.total_length()


def covered_length_batch(prior_starts, prior_lengths, query_starts, query_lengths) -> np.ndarray:
    """
    Length of ``query ∩ union(prior arcs)`` for many independent columns.

    ``prior_starts``/``prior_lengths`` have shape (K, T): K prior arcs for each
    of T columns. ``query_*`` have shape (T,). Equivalent to building an
    `ArcSet` from the K arcs of a column and calling `intersection_length`,
    but vectorized over columns.
    """
    ps = np.atleast_2d(np.asarray(prior_starts, dtype=float))
    pl = np.atleast_2d(np.asarray(prior_lengths, dtype=float))
    qs = np.asarray(query_starts, dtype=float)
    ql = np.asarray(query_lengths, dtype=float)
    if ps.shape[0] == 0:
        return np.zeros(np.broadcast(qs, ql).shape)
    # rotate each column so its query arc is [0, ql)
    rel = np.mod(ps - qs, CIRCLE)
    lo = np.concatenate([rel, rel - CIRCLE])
    hi = np.concatenate([rel + pl, rel + pl - CIRCLE])
    lo = np.clip(lo, 0.0, ql)
    hi = np.clip(hi, 0.0, ql)
    empty = hi <= lo
    lo[empty] = 0.0
    hi[empty] = 0.0
    order = np.argsort(lo, axis=0, kind="stable")
    lo = np.take_along_axis(lo, order, axis=0)
    hi = np.take_along_axis(hi, order, axis=0)
    reach = np.maximum.accumulate(hi, axis=0)
    prev = np.vstack([np.zeros((1,) + reach.shape[1:]), reach[:-1]])
    gain = np.maximum(0.0, hi - np.maximum(lo, prev))
    return gain.sum(axis=0)
