import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vbht.asymptotics import deterministic_term
from vbht.experiments import sample_mixture, sample_null
from vbht.hypothesis import TestReport, p_value, run_test, threshold
from vbht.model import Hyperparameters, MixtureParams, Sample
from vbht.solver import SolverConfig

H = Hyperparameters(20.0, 1.0)
HALF_CHI2_95 = 1.9207294  # half of the 95% chi-square(1) quantile


class TestThreshold:
    def test_five_percent(self):
        d = deterministic_term(500, H).d
        assert threshold(500, H, 0.05) == pytest.approx(d - HALF_CHI2_95, abs=1e-7)

    def test_strictly_decreasing_in_strictness(self):
        t = [threshold(200, H, lv) for lv in (0.10, 0.05, 0.01, 1e-6, 1e-12)]
        assert all(a > b for a, b in zip(t, t[1:]))
        assert t[-1] < deterministic_term(200, H).d - 20

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.1, 1.2, float("nan")])
    def test_level_domain(self, level):
        with pytest.raises(ValueError):
            threshold(100, H, level)

    @pytest.mark.parametrize("phi", [1.0, 0.5])
    def test_phase_domain(self, phi):
        with pytest.raises(ValueError, match="phase boundary"):
            threshold(100, Hyperparameters(phi), 0.05)
        with pytest.raises(ValueError, match="phase boundary"):
            p_value(0.0, 100, Hyperparameters(phi))


class TestPValue:
    def test_at_d_is_one(self):
        d = deterministic_term(300, H).d
        assert p_value(d, 300, H) == 1.0
        assert p_value(d + 5.0, 300, H) == 1.0

    def test_inverts_threshold(self):
        d = deterministic_term(300, H).d
        assert p_value(d - HALF_CHI2_95, 300, H) == pytest.approx(0.05, abs=1e-6)

    @given(st.floats(-50, 20), st.floats(-50, 20))
    def test_monotone(self, a, b):
        if a <= b:
            assert p_value(a, 400, H) <= p_value(b, 400, H)

    @given(st.floats(-1e6, 1e6))
    def test_is_probability(self, f):
        assert 0.0 <= p_value(f, 400, H) <= 1.0


class TestRunTest:
    def test_zero_sample_regression(self):
        # frozen from a single run
        r = run_test(Sample(np.zeros(100)), H)
        assert r.xi_hat == 0.0
        assert r.delta_f == pytest.approx(2.5924010212045694, abs=1e-8)
        assert r.d_term == pytest.approx(2.4171593735763377, abs=1e-12)
        assert r.threshold == pytest.approx(0.49642996322927546, abs=1e-12)
        assert r.p_value == 1.0
        assert not r.reject
        assert r.converged
        for level in (0.5, 0.25, 0.1, 0.01):
            assert not run_test(Sample(np.zeros(100)), H, level=level).reject

    def test_report_fields(self):
        x = sample_null(150, 3)
        r = run_test(x, H, level=0.1)
        assert (r.n, r.phi, r.sigma2, r.level) == (150, 20.0, 1.0, 0.1)
        assert r.threshold == pytest.approx(threshold(150, H, 0.1), abs=1e-14)
        assert r.p_value == p_value(r.delta_f, 150, H)
        assert r.reject == (r.delta_f < r.threshold)
        assert 0.0 <= r.n1 <= 150

    def test_nesting(self):
        for seed in range(40):
            x = sample_mixture(200, MixtureParams(0.5, 0.4), seed)
            strict = run_test(x, H, level=0.01)
            loose = run_test(x, H, level=0.05)
            assert strict.delta_f == loose.delta_f
            if strict.reject:
                assert loose.reject

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32), st.sampled_from([0.01, 0.05, 0.1, 0.3]))
    def test_reject_iff_small_p(self, seed, level):
        r = run_test(sample_null(120, seed), H, level=level)
        if abs(r.p_value - level) > 1e-12:
            assert r.reject == (r.p_value < level)

    def test_power_against_shift(self):
        rejected = sum(
            run_test(Sample(sample_null(400, 1000 + s).values + 0.5), H).reject
            for s in range(200)
        )
        assert rejected / 200 > 0.9

    def test_non_convergence_still_decides(self):
        r = run_test(sample_null(300, 1), H, SolverConfig(max_iters=1, restarts=0))
        assert not r.converged
        assert isinstance(r.reject, bool)

    def test_json_round_trip(self):
        r = run_test(sample_null(50, 2), H)
        text = r.to_json()
        assert "\n" not in text
        back = json.loads(text)
        assert list(back) == [
            "n", "phi", "sigma2", "delta_f", "d_term", "xi_hat", "level", "threshold",
            "p_value", "reject", "n1", "b_mean", "iterations", "converged",
        ]
        assert TestReport(**back) == r
        assert all(not isinstance(v, float) or math.isfinite(v) for v in back.values())
