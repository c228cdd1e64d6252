"""Slow, independent reference implementations used only by the tests."""

import itertools

import numpy as np

# -- grid counting ---------------------------------------------------------


def _yaw_cells(centers_deg, width_deg, step):
    """Boolean mask over cell centres on the circle lying inside each arc."""
    cells = (np.arange(int(round(360 / step))) + 0.5) * step
    c = np.atleast_1d(centers_deg)[:, None]
    d = np.abs(np.mod(cells[None, :] - c + 180.0, 360.0) - 180.0)
    return d < width_deg / 2.0


def _pitch_cells(centers_deg, height_deg, step):
    cells = -90.0 + (np.arange(int(round(180 / step))) + 0.5) * step
    c = np.atleast_1d(centers_deg)[:, None]
    return np.abs(cells[None, :] - c) < height_deg / 2.0


def overlap_grid_separable(yaw_a, pitch_a, yaw_b, pitch_b, w, h, step=0.05):
    """
    Viewport overlap by counting cells, one axis at a time.

    The shared region of two axis-aligned boxes is the product of their
    per-axis shared intervals, so the 2-D cell count is the product of the
    1-D counts. Pitch cells outside [-90, 90] are not counted, which is the
    no-overflow rule. Vectorized over the first axis of the inputs.
    """
    ya, yb = _yaw_cells(yaw_a, w, step), _yaw_cells(yaw_b, w, step)
    x = (ya & yb).sum(axis=1) * step
    if h is None:
        return x / w
    # unclipped pitch extent: count on an extended axis so boxes near the poles
    # keep their full height, as in the closed form
    cells = (np.arange(int(round(540 / step))) + 0.5) * step - 270.0
    pa = np.abs(cells[None, :] - np.atleast_1d(pitch_a)[:, None]) < h / 2.0
    pb = np.abs(cells[None, :] - np.atleast_1d(pitch_b)[:, None]) < h / 2.0
    y = (pa & pb).sum(axis=1) * step
    return x * y / (w * h)


def overlap_grid_2d(yaw_a, pitch_a, yaw_b, pitch_b, w, h, step=0.05):
    """Direct 2-D count over the cells of A's box."""
    nx, ny = int(round(w / step)), int(round(h / step))
    gx = yaw_a - w / 2 + (np.arange(nx) + 0.5) * step
    gy = pitch_a - h / 2 + (np.arange(ny) + 0.5) * step
    inx = np.abs(np.mod(gx - yaw_b + 180.0, 360.0) - 180.0) < w / 2
    iny = np.abs(gy - pitch_b) < h / 2
    return float(np.outer(iny, inx).sum()) / (nx * ny)


# -- boolean circle ---------------------------------------------------------

TENTH_CELLS = 3600


def circle_mask(start_tenths, length_tenths):
    m = np.zeros(TENTH_CELLS, dtype=bool)
    idx = (start_tenths + np.arange(length_tenths)) % TENTH_CELLS
    m[idx] = True
    return m


def mask_runs(mask):
    """Maximal circular runs of True as (start_cell, length_cells), sorted by start."""
    if mask.all():
        return [(0, TENTH_CELLS)]
    if not mask.any():
        return []
    # rotate so that index 0 is False
    z = int(np.flatnonzero(~mask)[0])
    r = np.roll(mask, -z)
    d = np.diff(np.concatenate([[0], r.astype(int), [0]]))
    starts, ends = np.flatnonzero(d == 1), np.flatnonzero(d == -1)
    return sorted(((s + z) % TENTH_CELLS, e - s) for s, e in zip(starts, ends))


# -- tile selection ---------------------------------------------------------


def knapsack_beta0(p, budget, rates, u):
    """Multiple-choice knapsack: max sum p_n u(q_n) s.t. sum r(q_n) <= budget."""
    budget = int(budget)
    dp = np.zeros(budget + 1)
    for pn in p:
        new = np.full(budget + 1, -np.inf)
        for r, uq in zip(rates, u):
            if r > budget:
                continue
            cand = np.full(budget + 1, -np.inf)
            cand[r:] = dp[: budget + 1 - r] + pn * uq
            new = np.maximum(new, cand)
        dp = new
    return float(dp[budget])


def brute_force(p, budget, beta, rates, u):
    """Plain-loop enumeration for small ladders, returning (best value, best vector)."""
    n = len(p)
    best, arg = -np.inf, None
    for q in itertools.product(range(len(rates)), repeat=n):
        if sum(rates[i] for i in q) > budget:
            continue
        v = (1 - beta) * sum(p[i] * u[q[i]] for i in range(n))
        v -= beta * sum((p[i] + p[(i + 1) % n]) / 2 * abs(u[q[i]] - u[q[(i + 1) % n]]) for i in range(n))
        if v > best + 1e-12:
            best, arg = v, q
    return best, arg
