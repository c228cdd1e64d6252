import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vrcache.geometry import fold_delta
from vrcache.traces import (UNIFORM_FOLDED_STD, HeadTrace, TraceError, TraceSet, folded_std,
                            load_traces, parse_trace, recenter, render_trace, sample_at,
                            synthesize_trace, synthesize_trace_set, unfolded_sigma,
                            write_trace_set)


def trace(t, yaw, pitch=None, sid="s", vid="v", cat="misc"):
    pitch = [0.0] * len(t) if pitch is None else pitch
    return HeadTrace(sid, vid, cat, np.array(t), np.array(yaw, dtype=float), np.array(pitch, dtype=float))


class TestParse:
    def test_basic(self):
        tr = parse_trace(b"t_ms,yaw_deg,pitch_deg\n0,0,0\n10,1.5,0.2\n")
        assert len(tr) == 2
        assert tr.yaw_deg.tolist() == [0.0, 1.5]
        assert tr.pitch_deg.tolist() == [0.0, 0.2]

    def test_accepts_text_and_streams(self):
        text = "t_ms,yaw_deg,pitch_deg\n0,0,0\n"
        assert len(parse_trace(text)) == 1
        assert len(parse_trace(io.StringIO(text))) == 1
        assert len(parse_trace(io.BytesIO(text.encode()))) == 1

    def test_non_monotonic_reports_line(self):
        with pytest.raises(TraceError, match="non-monotonic timestamp, line 4") as exc:
            parse_trace("t_ms,yaw_deg,pitch_deg\n20,0,0\n30,0,0\n25,0,0\n")
        assert exc.value.line == 4

    def test_yaw_normalized(self):
        assert parse_trace("t_ms,yaw_deg,pitch_deg\n0,185,0\n").yaw_deg[0] == -175

    @pytest.mark.parametrize("body,line", [
        ("0,1\n", 2),
        ("0,x,0\n", 2),
        ("0,0,0\n10,0,95\n", 3),
        ("0,0,0\n10,nan,0\n", 3),
        ("0,1e3,0\n1.5,0,0\n", 3),
    ])
    def test_malformed(self, body, line):
        with pytest.raises(TraceError) as exc:
            parse_trace("t_ms,yaw_deg,pitch_deg\n" + body)
        assert exc.value.line == line

    def test_bad_header(self):
        with pytest.raises(TraceError, match="header"):
            parse_trace("time,yaw,pitch\n0,0,0\n")

    def test_empty(self):
        with pytest.raises(TraceError):
            parse_trace("")
        with pytest.raises(TraceError):
            parse_trace("t_ms,yaw_deg,pitch_deg\n")

    @given(st.lists(st.tuples(st.integers(1, 50), st.floats(-180, 179.999999), st.floats(-90, 90)),
                    min_size=1, max_size=30))
    def test_round_trip(self, rows):
        t = np.cumsum([r[0] for r in rows])
        tr = trace(t, [r[1] for r in rows], [r[2] for r in rows])
        back = parse_trace(render_trace(tr), tr.session_id, tr.video_id, tr.category)
        assert back == tr


class TestSample:
    def test_on_sample(self):
        tr = trace([0, 10, 20], [10, 20, -170.25], [0, 5, 6])
        d = sample_at(tr, 20)
        assert (d.yaw_deg, d.pitch_deg) == (-170.25, 6)

    def test_midpoint(self):
        assert sample_at(trace([0, 10], [10, 20]), 5).yaw_deg == 15

    def test_seam(self):
        assert sample_at(trace([0, 10], [175, -175]), 5).yaw_deg == -180

    def test_out_of_range(self):
        tr = trace([0, 10], [0, 0])
        with pytest.raises(ValueError):
            sample_at(tr, 11)
        with pytest.raises(ValueError):
            sample_at(tr, -1)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 90))
    def test_continuity(self, seed, sigma):
        tr = synthesize_trace(sigma, 200, seed)
        y, _ = tr.sample(np.arange(0, 201))
        steps = np.abs(fold_delta(np.diff(y)))
        per10 = np.abs(fold_delta(np.diff(tr.yaw_deg)))
        bound = np.repeat(per10, 10)
        assert np.all(steps <= bound + 1e-9)

    def test_gaps_flagged(self):
        assert trace([0, 10, 50, 60], [0] * 4).gaps() == [(10, 50)]

    def test_recenter(self):
        tr = recenter(trace([0, 10], [100, 110]))
        assert tr.yaw_deg.tolist() == [0, 10]


class TestTraceSet:
    def test_common_duration_and_category(self):
        ts = TraceSet("v", [trace([0, 10, 20], [0] * 3, sid="a", cat="static"),
                            trace([0, 10], [0] * 2, sid="b", cat="static")])
        assert ts.common_duration_ms == 10
        assert ts.category == "static"
        times, yaw, _ = ts.grid(5)
        assert times.tolist() == [0, 5, 10] and yaw.shape == (2, 3)

    def test_mixed_video_rejected(self):
        with pytest.raises(TraceError):
            TraceSet("v", [trace([0], [0], vid="w")])

    def test_disk_round_trip(self, tmp_path):
        ts = synthesize_trace_set(46.93, 3, 1000, 1, "static", "vid")
        write_trace_set(ts, tmp_path)
        (back,) = load_traces(tmp_path)
        assert back == ts
        (again,) = load_traces(tmp_path / "vid")
        assert again == ts


class TestSynthesis:
    def test_zero_sigma_constant(self):
        tr = synthesize_trace(0, 5000, 1)
        assert np.all(tr.yaw_deg == 0) and np.all(tr.pitch_deg == 0)

    def test_deterministic(self):
        assert synthesize_trace(50, 3000, 9) == synthesize_trace(50, 3000, 9)
        assert not synthesize_trace(50, 3000, 9) == synthesize_trace(50, 3000, 10)

    def test_folded_std_closed_form_against_monte_carlo(self):
        rng = np.random.default_rng(0)
        for s in (40.0, 111.9, 300.0):
            x = np.mod(rng.normal(0, s, 400_000) + 180, 360) - 180
            assert folded_std(s) == pytest.approx(x.std(), rel=5e-3)

    def test_unfolded_sigma_inverts(self):
        for target in (10.0, 46.93, 94.09, 100.0):
            assert folded_std(unfolded_sigma(target)) == pytest.approx(target, abs=1e-6)
        assert unfolded_sigma(94.09) == pytest.approx(111.92, abs=0.01)
        with pytest.raises(ValueError):
            unfolded_sigma(UNIFORM_FOLDED_STD + 1)

    def test_ten_second_std_calibrated(self):
        seeds = np.random.SeedSequence(5).generate_state(10_000)
        d = np.array([synthesize_trace(94.09, 10_000, int(s)).yaw_deg[-1] for s in seeds])
        assert -180 <= d.min() and d.max() < 180
        assert abs(d.std() - 94.09) <= 0.10 * 94.09

    def test_pitch_stays_in_range(self):
        tr = synthesize_trace(100, 600_000, 3)
        assert np.abs(tr.pitch_deg).max() <= 90

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            synthesize_trace(-1, 100, 0)
