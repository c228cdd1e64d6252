import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vrcache.bandwidth import (Constant, Empirical, ThreeLevel, draw, load_samples,
                               normalized_bandwidth, parse_bw, scale_to_average)

N = 1_000_000


class TestLoad:
    def test_basic(self):
        assert load_samples("100\n200\n") == [100, 200]
        assert load_samples(io.BytesIO(b"1.5\n2\n")) == [1.5, 2.0]

    @pytest.mark.parametrize("text", ["-5\n", "0\n", "\n", "", "abc\n", "1\n\n2\n"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            load_samples(text)

    def test_large(self):
        text = "".join(f"{i + 1}\n" for i in range(10_000))
        assert len(load_samples(text)) == 10_000


class TestScale:
    def test_empirical(self):
        m = scale_to_average(Empirical([1, 3]), 12000)
        assert m.samples.tolist() == [6000, 18000] and m.avg == 12000

    def test_three_level(self):
        m = scale_to_average(ThreeLevel(5), 12000)
        assert m.levels == ((24000, 0.2), (12000, 0.4), (6000, 0.4))
        assert sum(v * p for v, p in m.levels) == pytest.approx(12000)

    def test_constant(self):
        m = scale_to_average(Constant(1), 12000)
        rng = np.random.default_rng(0)
        assert np.all(m.draw_many(rng, 100) == 12000)

    def test_bad_target(self):
        with pytest.raises(ValueError):
            scale_to_average(Constant(1), 0)

    @given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=50), st.floats(1, 1e5))
    def test_empirical_mean(self, samples, target):
        m = Empirical(samples).scaled(target)
        assert m.samples.mean() == pytest.approx(target, rel=1e-6)


class TestDraw:
    @pytest.mark.parametrize("model", [Constant(12000), ThreeLevel(12000), Empirical([6000, 18000]),
                                       Empirical([1, 2, 3, 50]).scaled(12000)])
    def test_monte_carlo_mean(self, model):
        x = model.draw_many(np.random.default_rng(1), N)
        assert abs(x.mean() / 12000 - 1) <= 0.005
        assert x.min() > 0

    def test_three_level_frequencies(self):
        x = ThreeLevel(100).draw_many(np.random.default_rng(2), N)
        for v, p in ThreeLevel(100).levels:
            assert (x == v).mean() == pytest.approx(p, abs=0.005)

    def test_empirical_uniform(self):
        x = Empirical([6000, 18000]).draw_many(np.random.default_rng(3), N)
        assert (x == 6000).mean() == pytest.approx(0.5, abs=0.005)

    def test_deterministic(self):
        m = ThreeLevel(10)
        a = [draw(m, np.random.default_rng(5)) for _ in range(3)]
        b = [draw(m, np.random.default_rng(5)) for _ in range(3)]
        assert a == b


class TestNormalized:
    def test_values(self):
        assert normalized_bandwidth(12000) == pytest.approx(0.476, abs=5e-4)
        assert normalized_bandwidth(Constant(25188)) == 1.0

    def test_zero(self):
        with pytest.raises(ValueError):
            normalized_bandwidth(0)


class TestParse:
    def test_variants(self, tmp_path):
        assert parse_bw("constant", 5) == Constant(5)
        assert parse_bw("three-level", 5) == ThreeLevel(5)
        f = tmp_path / "bw.txt"
        f.write_text("1\n3\n")
        assert parse_bw(f"file:{f}", 12000).samples.tolist() == [6000, 18000]
        with pytest.raises(ValueError):
            parse_bw("lte", 5)
