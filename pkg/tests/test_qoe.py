import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vrcache.geometry import Direction
from vrcache.qoe import (DEFAULT_LADDER, QualityLadder, TileViewProbability, UtilityParams,
                         exhaustive_optimize, objective, optimize_tiles, optimize_tiles_batch,
                         tile_view_probabilities, tile_view_probability_matrix, utility,
                         utility_table)

from oracles import brute_force, knapsack_beta0

U = utility_table()
RATES = DEFAULT_LADDER.rates
probs6 = st.lists(st.floats(0, 1), min_size=6, max_size=6).filter(lambda v: sum(v) > 1e-3).map(
    lambda v: np.array(v) / sum(v))


def random_instance(rng, n=6):
    p = rng.dirichlet(np.full(n, rng.choice([0.3, 1.0, 5.0])))
    return p, float(rng.uniform(0, n * 4198 * 1.1)), float(rng.choice([0.0, 1.0, rng.uniform()]))


class TestLadderAndUtility:
    def test_values(self):
        assert utility(4198) == pytest.approx(9.52358, abs=1e-5)
        assert utility(0) == -utility(4198)
        assert utility(144) == pytest.approx(-3.88889, abs=1e-5)

    def test_closed_form_a2(self):
        for q in RATES[1:]:
            assert utility(q) == pytest.approx(10 * (1 - 200 / q), rel=1e-12)

    def test_monotone(self):
        assert all(b > a for a, b in zip(U, U[1:]))

    def test_rate_off_ladder(self):
        with pytest.raises(ValueError):
            utility(500)

    @pytest.mark.parametrize("bad", [(1, 2), (0,), (0, 5, 5), (0, 5, 3)])
    def test_ladder_validation(self, bad):
        with pytest.raises(ValueError):
            QualityLadder(bad)

    @pytest.mark.parametrize("kw", [{"a": 1.0}, {"b": 0}, {"theta": -1}])
    def test_params_validation(self, kw):
        with pytest.raises(ValueError):
            UtilityParams(**kw)


class TestTileProbabilities:
    def test_one_hot(self):
        p = tile_view_probabilities(Direction(-150), 0, 6)  # -150 = 210, tile 3 centre
        assert p.probs == (0, 0, 0, 1, 0, 0)

    def test_uniform(self):
        np.testing.assert_allclose(tile_view_probabilities(17.0, 1e6, 6).as_array(), 1 / 6)

    def test_symmetric_about_centre(self):
        p = tile_view_probabilities(Direction(-150), 46.93, 6).as_array()
        assert p.sum() == pytest.approx(1, abs=1e-12)
        assert p[2] == pytest.approx(p[4], abs=1e-9)
        assert p[1] == pytest.approx(p[5], abs=1e-9)
        assert p.argmax() == 3

    def test_against_monte_carlo(self):
        rng = np.random.default_rng(0)
        x = np.mod(rng.normal(100.0, 80.0, 2_000_000), 360.0)
        mc = np.bincount((x // 60).astype(int), minlength=6) / x.size
        np.testing.assert_allclose(tile_view_probability_matrix([100.0], 80.0, 6)[0], mc, atol=2e-3)

    def test_rotation(self):
        p = tile_view_probability_matrix([10.0], 30.0, 6)[0]
        q = tile_view_probability_matrix([70.0], 30.0, 6)[0]
        np.testing.assert_allclose(np.roll(p, 1), q, atol=1e-12)

    def test_type_validation(self):
        with pytest.raises(ValueError):
            TileViewProbability((0.5, 0.6))
        with pytest.raises(ValueError):
            TileViewProbability((1.5, -0.5))


class TestOptimizer:
    def test_saturated_budget(self):
        sel = optimize_tiles(np.full(6, 1 / 6), 25188, 0.0)
        assert sel.quality_index == (6,) * 6 and sel.total_rate == 25188

    def test_zero_budget(self):
        p = np.array([0.5, 0.2, 0.1, 0.1, 0.05, 0.05])
        sel = optimize_tiles(p, 0, 0.3)
        assert sel.quality_index == (0,) * 6
        assert sel.objective_value == pytest.approx(0.7 * utility(0))

    def test_single_tile(self):
        for budget in (0, 143.9, 144, 700, 5000):
            sel = optimize_tiles([1.0], budget, 0.5)
            best = max(i for i, r in enumerate(RATES) if r <= math.floor(budget))
            assert sel.quality_index == (best,)

    def test_matches_exhaustive(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            p, budget, beta = random_instance(rng)
            dp = optimize_tiles(p, budget, beta)
            ex = exhaustive_optimize(p, budget, beta)
            assert dp.objective_value == pytest.approx(ex.objective_value, abs=1e-9)
            assert dp.quality_index == ex.quality_index
            assert dp.total_rate <= math.floor(budget)

    def test_matches_loop_brute_force_small_ladder(self):
        ladder = QualityLadder((0, 3, 7, 12))
        u = utility_table(ladder)
        rng = np.random.default_rng(2)
        for n in (1, 2, 3, 5):
            for _ in range(15):
                p = rng.dirichlet(np.ones(n))
                budget, beta = int(rng.integers(0, 12 * n + 3)), float(rng.uniform())
                best, arg = brute_force(p, budget, beta, ladder.rates, u)
                sel = optimize_tiles(p, budget, beta, ladder)
                assert sel.objective_value == pytest.approx(best, abs=1e-9)
                assert sel.quality_index == arg

    def test_beta0_matches_knapsack(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            p, budget, _ = random_instance(rng)
            sel = optimize_tiles(p, budget, 0.0)
            assert sel.objective_value == pytest.approx(knapsack_beta0(p, budget, RATES, U), abs=1e-9)

    def test_tie_break_lexicographic(self):
        # uniform probabilities, budget for exactly one top tile: every rotation ties
        sel = optimize_tiles(np.full(6, 1 / 6), 4198, 0.0)
        ex = exhaustive_optimize(np.full(6, 1 / 6), 4198, 0.0)
        assert sel.quality_index == ex.quality_index

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        inst = [random_instance(rng) for _ in range(30)]
        beta = 0.4
        P = np.array([i[0] for i in inst])
        B = np.array([i[1] for i in inst])
        Q = optimize_tiles_batch(P, B, beta)
        for k in range(30):
            assert tuple(Q[k]) == optimize_tiles(P[k], B[k], beta).quality_index

    def test_exhaustive_guard(self):
        with pytest.raises(ValueError):
            exhaustive_optimize(np.full(9, 1 / 9), 1000, 0.5)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            optimize_tiles(np.full(6, 1 / 6), 100, 1.5)
        with pytest.raises(ValueError):
            optimize_tiles(np.full(6, 0.1), 100, 0.5)
        with pytest.raises(ValueError):
            optimize_tiles_batch(np.full((1, 6), 1 / 6), -1, 0.5)

    @settings(max_examples=60, deadline=None)
    @given(probs6, st.floats(0, 30000), st.floats(0, 1), st.floats(0, 5000))
    def test_feasible_and_budget_monotone(self, p, budget, beta, extra):
        a = optimize_tiles(p, budget, beta)
        b = optimize_tiles(p, budget + extra, beta)
        assert a.total_rate <= math.floor(budget)
        assert b.objective_value >= a.objective_value - 1e-9

    @settings(max_examples=60, deadline=None)
    @given(probs6, st.floats(0, 30000), st.floats(0, 1), st.integers(0, 5))
    def test_rotation_equivariance(self, p, budget, beta, k):
        a = optimize_tiles(p, budget, beta)
        b = optimize_tiles(np.roll(p, k), budget, beta)
        assert a.objective_value == pytest.approx(b.objective_value, abs=1e-9)
        # rotated selection is optimal too
        rotated = objective(np.roll(a.quality_index, k), np.roll(p, k), beta, U)
        assert rotated == pytest.approx(b.objective_value, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(probs6, st.floats(0, 30000))
    def test_beta0_decomposes(self, p, budget):
        sel = optimize_tiles(p, budget, 0.0)
        assert sel.objective_value == pytest.approx(float(np.dot(p, U[list(sel.quality_index)])))
