"""
Tile view probabilities, the tile utility model and QoE-optimal tile quality
selection under a rate budget.

The selection objective over a ring of N tiles with qualities q_0..q_{N-1} is

    (1 - beta) * sum_n P(n) u(q_n)
        - beta * sum_n (P(n) + P(n+1)) / 2 * |u(q_n) - u(q_{n+1})|

with tile indices taken modulo N, maximized subject to
sum_n r(q_n) <= floor(budget).

`optimize_tiles` solves it with a dynamic program over (tile, previous
tile's quality, spent rate); the spent-rate axis only holds sums that are
actually reachable with the ladder, which keeps it a few hundred entries
wide. The ring is closed by fixing tile 0's quality. `exhaustive_optimize`
enumerates every assignment and is kept as an independent check.

Ties are broken towards the lexicographically smallest quality-index vector.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from numba import njit
from scipy.special import ndtr

from .geometry import Direction

# objective values closer than this are treated as equal when tie-breaking
TIE_TOL = 1e-12
EXHAUSTIVE_LIMIT = 10**7


@dataclass(frozen=True)
class QualityLadder:
    rates: Tuple[int, ...]

    def __post_init__(self):
        rates = tuple(int(r) for r in self.rates)
        if len(rates) < 2 or rates[0] != 0:
            raise ValueError("ladder must start with 0 and have at least one positive rate")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"ladder rates must be strictly ascending: {rates}")
        object.__setattr__(self, "rates", rates)

    @property
    def levels(self) -> int:
        return len(self.rates)

    @property
    def max_rate(self) -> int:
        return self.rates[-1]

    def index(self, rate) -> int:
        """Position of ``rate`` on the ladder, or -1."""
        for i, r in enumerate(self.rates):
            if rate == r:
                return i
        return -1


DEFAULT_LADDER = QualityLadder((0, 144, 268, 625, 1124, 2217, 4198))


@dataclass(frozen=True)
class UtilityParams:
    a: float = 2.0
    b: float = 10.0
    theta: float = 200.0

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError("utility parameter a must be > 1")
        if not self.b > 0:
            raise ValueError("utility parameter b must be > 0")
        if not self.theta > 0:
            raise ValueError("utility parameter theta must be > 0")


DEFAULT_UTILITY = UtilityParams()


def _positive_utility(q: float, p: UtilityParams) -> float:
    return p.b * ((q / p.theta) ** (1.0 - p.a) - 1.0) / (1.0 - p.a)


def utility(q_rate, params: UtilityParams = DEFAULT_UTILITY,
            ladder: QualityLadder = DEFAULT_LADDER) -> float:
    """
    Utility of viewing a tile delivered at ``q_rate``.

    Not downloading the tile (rate 0) costs the negative of the top rate's
    utility.
    """
    if ladder.index(q_rate) < 0:
        raise ValueError(f"rate {q_rate} is not on the quality ladder {ladder.rates}")
    if q_rate == 0:
        return -_positive_utility(ladder.max_rate, params)
    return _positive_utility(float(q_rate), params)


def utility_table(ladder: QualityLadder = DEFAULT_LADDER,
                  params: UtilityParams = DEFAULT_UTILITY) -> np.ndarray:
    return np.array([utility(r, params, ladder) for r in ladder.rates])


@dataclass(frozen=True)
class TileViewProbability:
    probs: Tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        if not p:
            raise ValueError("need at least one tile")
        if any(x < 0 or not math.isfinite(x) for x in p):
            raise ValueError("tile probabilities must be finite and non-negative")
        if abs(sum(p) - 1.0) > 1e-9:
            raise ValueError(f"tile probabilities sum to {sum(p)}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def n_tiles(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    def rotated(self, k: int) -> "TileViewProbability":
        """Shift so that tile n's probability moves to tile n + k."""
        return TileViewProbability(tuple(np.roll(self.as_array(), k)))


@dataclass(frozen=True)
class TileSelection:
    quality_index: Tuple[int, ...]
    objective_value: float
    total_rate: int
    rates: Tuple[int, ...] = field(default=(), repr=False)


# wrapped normal is indistinguishable from uniform beyond this sigma
_UNIFORM_SIGMA = 720.0


def tile_view_probability_matrix(yaws, sigma_deg: float, n_tiles: int) -> np.ndarray:
    """
    Probabilities of viewing each of ``n_tiles`` fixed yaw tiles.

    Each row is a wrapped normal with mean ``yaws[i]`` and std ``sigma_deg``
    integrated over the tiles ``[k*360/n, (k+1)*360/n)``.
    """
    if n_tiles < 1:
        raise ValueError("n_tiles must be >= 1")
    if sigma_deg < 0:
        raise ValueError("sigma must be >= 0")
    mu = np.mod(np.atleast_1d(np.asarray(yaws, dtype=float)), 360.0)
    width = 360.0 / n_tiles
    if sigma_deg >= _UNIFORM_SIGMA or math.isinf(sigma_deg):
        return np.full((mu.size, n_tiles), 1.0 / n_tiles)
    if sigma_deg == 0:
        tile = np.floor(mu / width).astype(int) % n_tiles
        out = np.zeros((mu.size, n_tiles))
        out[np.arange(mu.size), tile] = 1.0
        return out
    wraps = int(math.ceil(9.0 * sigma_deg / 360.0)) + 1
    edges = np.arange(n_tiles + 1) * width
    shifts = 360.0 * np.arange(-wraps, wraps + 1)
    # (S, wraps, edges)
    z = (edges[None, None, :] + shifts[None, :, None] - mu[:, None, None]) / sigma_deg
    cdf = ndtr(z).sum(axis=1)
    mass = np.clip(np.diff(cdf, axis=1), 0.0, None)
    return mass / mass.sum(axis=1, keepdims=True)


def tile_view_probabilities(predicted, sigma_deg: float, n_tiles: int) -> TileViewProbability:
    yaw = predicted.yaw_deg if isinstance(predicted, Direction) else float(predicted)
    return TileViewProbability(tuple(tile_view_probability_matrix([yaw], sigma_deg, n_tiles)[0]))


def objective(quality_index: Sequence[int], probs, beta: float, utilities: np.ndarray) -> float:
    q = np.asarray(quality_index, dtype=int)
    p = np.asarray(probs, dtype=float)
    uq = utilities[q]
    pair = (p + np.roll(p, -1)) / 2.0
    smooth = np.abs(uq - np.roll(uq, -1))
    return float((1.0 - beta) * np.dot(p, uq) - beta * np.dot(pair, smooth))


# -- dynamic program ---------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _cost_levels(rates: Tuple[int, ...], n_tiles: int):
    """
    Reachable spent-rate values after each number of tiles.

    Returns flattened sorted levels, their offsets, and ``nxt[q, off[n]+j]``:
    the index within level n+1 of ``level_n[j] + rates[q]``.
    """
    r = np.asarray(rates, dtype=np.int64)
    levels = [np.zeros(1, dtype=np.int64)]
    for _ in range(n_tiles):
        levels.append(np.unique(levels[-1][:, None] + r[None, :]))
    off = np.zeros(n_tiles + 2, dtype=np.int64)
    off[1:] = np.cumsum([lv.size for lv in levels])
    nxt = np.full((r.size, off[-1]), -1, dtype=np.int64)
    for n in range(n_tiles):
        cur, nxt_level = levels[n], levels[n + 1]
        for qi, rate in enumerate(r):
            nxt[qi, off[n]:off[n + 1]] = np.searchsorted(nxt_level, cur + rate)
    return np.concatenate(levels), off, nxt


@njit(cache=True, fastmath=True)
def _max_shifted(dst, src, c, count):
    for j in range(count):
        v = src[j] - c
        dst[j] = v if v > dst[j] else dst[j]


@njit(cache=True)
def _solve_one(p, budget, beta, u, rates, dist, levels, off, nxt, tol, G, H, cnt, out):
    n_tiles = p.shape[0]
    L = u.shape[0]
    neg = -np.inf
    node = np.empty(n_tiles)
    w = np.empty(n_tiles)
    for n in range(n_tiles):
        node[n] = (1.0 - beta) * p[n]
        w[n] = beta * (p[n] + p[(n + 1) % n_tiles]) * 0.5
    for n in range(n_tiles + 1):
        cnt[n] = np.searchsorted(levels[off[n]:off[n + 1]], budget, side="right")
    last = n_tiles - 1

    # G[q0, qprev, off[m] + j]: best value of tiles m..N-1 (their nodes, the
    # edges into them and the closing edge back to tile 0) given tile 0 at
    # q0, tile m-1 at qprev and levels[off[m] + j] already spent.
    if n_tiles == 1:
        for q0 in range(L):
            G[q0, q0, off[1]:off[1] + cnt[1]] = 0.0
    else:
        # Last tile: the affordable qualities are always a prefix of the
        # ladder, so the level collapses to a running maximum over q.
        o = off[last]
        room = np.searchsorted(rates, budget - levels[o:o + cnt[last]], side="right") - 1
        prefix_best = np.empty(L)
        for q0 in range(L):
            for qp in range(L):
                run = neg
                for q in range(L):
                    v = node[last] * u[q] - w[last - 1] * dist[qp, q] - w[last] * dist[q, q0]
                    if v > run:
                        run = v
                    prefix_best[q] = run
                for j in range(cnt[last]):
                    G[q0, qp, o + j] = prefix_best[room[j]]

    for n in range(last - 1, 0, -1):
        on = off[n]
        on1 = off[n + 1]
        cn = cnt[n]
        cn1 = cnt[n + 1]
        for q0 in range(L):
            for q in range(L):
                a = node[n] * u[q]
                for j in range(cn):
                    k = nxt[q, on + j]
                    if k < cn1:
                        H[q, j] = a + G[q0, q, on1 + k]
                    else:
                        H[q, j] = neg
            for qp in range(L):
                row = G[q0, qp, on:on + cn]
                row[:] = neg
                for q in range(L):
                    _max_shifted(row, H[q], w[n - 1] * dist[qp, q], cn)

    best = neg
    top = np.empty(L)
    for q0 in range(L):
        k = nxt[q0, off[0]]
        if k < cnt[1]:
            top[q0] = node[0] * u[q0] + G[q0, q0, off[1] + k]
        else:
            top[q0] = neg
        if top[q0] > best:
            best = top[q0]

    q0 = 0
    while top[q0] < best - tol:
        q0 += 1
    out[0] = q0
    prefix = node[0] * u[q0]
    k = nxt[q0, off[0]]
    qprev = q0
    for n in range(1, n_tiles):
        chosen = -1
        chosen_val = neg
        fallback = 0
        for q in range(L):
            k2 = nxt[q, off[n] + k]
            if k2 >= cnt[n + 1]:
                continue
            if n == last:
                rest = -w[last] * dist[q, q0]
            else:
                rest = G[q0, q, off[n + 1] + k2]
            tot = prefix + node[n] * u[q] - w[n - 1] * dist[qprev, q] + rest
            if tot >= best - tol:
                chosen = q
                break
            if tot > chosen_val:
                chosen_val = tot
                fallback = q
        if chosen < 0:
            chosen = fallback
        prefix += node[n] * u[chosen] - w[n - 1] * dist[qprev, chosen]
        k = nxt[chosen, off[n] + k]
        qprev = chosen
        out[n] = chosen
    return best


@njit(cache=True)
def _solve_batch(P, budgets, beta, u, rates, dist, levels, off, nxt, tol, out):
    L = u.shape[0]
    n_tiles = P.shape[1]
    widest = 0
    for n in range(n_tiles + 1):
        if off[n + 1] - off[n] > widest:
            widest = off[n + 1] - off[n]
    G = np.empty((L, L, off[n_tiles + 1]))
    H = np.empty((L, widest))
    cnt = np.empty(n_tiles + 1, dtype=np.int64)
    for s in range(P.shape[0]):
        _solve_one(P[s], budgets[s], beta, u, rates, dist, levels, off, nxt, tol, G, H, cnt, out[s])


def _check_inputs(probs, beta: float) -> np.ndarray:
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"beta {beta} outside [0, 1]")
    if isinstance(probs, TileViewProbability):
        return probs.as_array()
    return TileViewProbability(tuple(np.asarray(probs, dtype=float))).as_array()


def optimize_tiles_batch(prob_matrix, budgets, beta: float,
                         ladder: QualityLadder = DEFAULT_LADDER,
                         params: UtilityParams = DEFAULT_UTILITY) -> np.ndarray:
    """
    Solve many independent selections at once.

    ``prob_matrix`` is (S, N); ``budgets`` is (S,) or a scalar. Returns an
    (S, N) array of quality indices.
    """
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"beta {beta} outside [0, 1]")
    P = np.ascontiguousarray(np.atleast_2d(prob_matrix), dtype=np.float64)
    S, n_tiles = P.shape
    b = np.broadcast_to(np.asarray(budgets, dtype=float), (S,))
    if np.any(b < 0):
        raise ValueError("budget must be >= 0")
    cap = n_tiles * ladder.max_rate
    b = np.minimum(np.floor(b), cap).astype(np.int64)
    u = utility_table(ladder, params)
    dist = np.abs(u[:, None] - u[None, :])
    levels, off, nxt = _cost_levels(ladder.rates, n_tiles)
    out = np.empty((S, n_tiles), dtype=np.int64)
    if S:
        rates = np.asarray(ladder.rates, dtype=np.int64)
        _solve_batch(P, b, float(beta), u, rates, dist, levels, off, nxt, TIE_TOL, out)
    return out


def _selection(q, p, beta, ladder, params) -> TileSelection:
    u = utility_table(ladder, params)
    rates = tuple(ladder.rates[i] for i in q)
    return TileSelection(tuple(int(i) for i in q), objective(q, p, beta, u), int(sum(rates)), rates)


def optimize_tiles(probs, budget: float, beta: float,
                   ladder: QualityLadder = DEFAULT_LADDER,
                   params: UtilityParams = DEFAULT_UTILITY) -> TileSelection:
    """Best tile qualities for one chunk under a rate budget."""
    p = _check_inputs(probs, beta)
    q = optimize_tiles_batch(p[None, :], [budget], beta, ladder, params)[0]
    return _selection(q, p, beta, ladder, params)


@functools.lru_cache(maxsize=8)
def _enumeration(levels: int, n_tiles: int) -> np.ndarray:
    grid = np.array(list(itertools.product(range(levels), repeat=n_tiles)), dtype=np.int64)
    return grid.reshape(-1, n_tiles)


def exhaustive_optimize(probs, budget: float, beta: float,
                        ladder: QualityLadder = DEFAULT_LADDER,
                        params: UtilityParams = DEFAULT_UTILITY) -> TileSelection:
    """Brute-force reference for `optimize_tiles`."""
    p = _check_inputs(probs, beta)
    n_tiles = p.size
    if ladder.levels ** n_tiles > EXHAUSTIVE_LIMIT:
        raise ValueError(f"{ladder.levels}^{n_tiles} assignments is too many to enumerate")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    grid = _enumeration(ladder.levels, n_tiles)
    u = utility_table(ladder, params)
    rates = np.asarray(ladder.rates)
    U = u[grid]
    pair = (p + np.roll(p, -1)) / 2.0
    values = (1.0 - beta) * (U @ p) - beta * (np.abs(U - np.roll(U, -1, axis=1)) @ pair)
    feasible = rates[grid].sum(axis=1) <= math.floor(budget)
    values[~feasible] = -np.inf
    best = values.max()
    pick = int(np.argmax(values >= best - TIE_TOL))
    return _selection(grid[pick], p, beta, ladder, params)
