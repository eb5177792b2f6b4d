import math

import numpy as np
import pytest

from vbht.experiments import (
    ExperimentGrid,
    RejectionRow,
    asymptote_comparison,
    mix_seed,
    null_gaps,
    null_trial,
    parallel_map,
    rejection_table,
    sample_mixture,
    sample_null,
    top_sum,
    trimsum_experiment,
)
from vbht.hypothesis import threshold
from vbht.model import Hyperparameters, MixtureParams
from vbht.solver import SolverConfig

from conftest import NULL_RATE_LEVELS

H = Hyperparameters(20.0, 1.0)


class TestSeeding:
    def test_mix_seed_regression(self):
        # first output of the reference splitmix64 generator seeded with 0
        assert mix_seed(0) == 0xE220A8397B1DCDAF
        assert mix_seed(0, 100, 7) == mix_seed(0, 100, 7)
        assert len({mix_seed(0, n, t) for n in (100, 200) for t in range(500)}) == 1000

    def test_sample_null_deterministic(self):
        np.testing.assert_array_equal(sample_null(50, 123).values, sample_null(50, 123).values)
        assert not np.array_equal(sample_null(50, 123).values, sample_null(50, 124).values)

    def test_sample_null_rejects_empty(self):
        with pytest.raises(ValueError):
            sample_null(0, 1)

    @pytest.mark.parametrize("seed", [0, 2**63 + 5])
    def test_sample_null_moments(self, seed):
        n = 10**6
        x = sample_null(n, seed).values
        assert abs(x.mean()) < 4 / math.sqrt(n)
        assert abs(x.var() - 1) < 4 * math.sqrt(2 / n)


class TestMixture:
    def test_zero_weight_is_null(self):
        np.testing.assert_array_equal(
            sample_mixture(300, MixtureParams(0.0, 3.0), 9).values, sample_null(300, 9).values
        )

    def test_all_shifted(self):
        n = 10**5
        x = sample_mixture(n, MixtureParams(1.0, 5.0), 4).values
        assert abs(x.mean() - 5) < 4 / math.sqrt(n)

    def test_coinciding_components(self):
        n = 10**5
        x = sample_mixture(n, MixtureParams(0.5, 0.0), 4).values
        assert abs(x.mean()) < 4 / math.sqrt(n)

    def test_weight_fraction(self):
        n = 10**5
        z = sample_null(n, 8).values
        x = sample_mixture(n, MixtureParams(0.3, 2.0), 8).values
        frac = np.mean(~np.isclose(x, z))
        assert abs(frac - 0.3) < 4 * math.sqrt(0.21 / n)


class TestRejectionTable:
    def test_single_trial(self):
        grid = ExperimentGrid((100,), 1, (0.05, 0.5), H, master_seed=3, threads=1)
        for row in rejection_table(grid):
            assert row.rate in (0.0, 1.0)

    def test_thread_count_independence(self):
        rows = [
            rejection_table(ExperimentGrid((60, 120), 40, NULL_RATE_LEVELS, H, 5, threads))
            for threads in (1, 4, 8)
        ]
        assert rows[0] == rows[1] == rows[2]
        gaps = [null_gaps(80, 30, H, master_seed=5, threads=t) for t in (1, 4, 8)]
        np.testing.assert_array_equal(gaps[0], gaps[1])
        np.testing.assert_array_equal(gaps[0], gaps[2])

    def test_binomial_coherence(self):
        grid = ExperimentGrid((100, 200), 200, (0.5, 0.10, 0.05, 0.01), H, 11, 0)
        rows = rejection_table(grid)
        assert len(rows) == 8
        for n in (100, 200):
            rates = [r.rate for r in rows if r.n == n]
            assert all(a >= b for a, b in zip(rates, rates[1:]))
        for r in rows:
            assert 0 <= r.rejected <= r.trials
            assert r.rate == r.rejected / r.trials

    def test_matches_run_test_decisions(self):
        rows = rejection_table(ExperimentGrid((90,), 25, (0.3,), H, 2, 1))
        thr = threshold(90, H, 0.3)
        count = sum(null_trial(90, t, H, SolverConfig(), 2)[1].delta_f < thr for t in range(25))
        assert rows[0].rejected == count

    @pytest.mark.parametrize(
        "kwargs",
        [dict(trials=0), dict(sample_sizes=(1, 100)), dict(levels=(0.0,)), dict(threads=-1)],
    )
    def test_grid_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentGrid(**kwargs)

    @pytest.mark.slow
    def test_seed_sensitivity(self, null_rate_rows):
        other = rejection_table(ExperimentGrid((100,), 5000, NULL_RATE_LEVELS, H, 1, 0))
        base = [r for r in null_rate_rows if r.n == 100]
        for a, b in zip(base, other):
            p = a.rate
            assert abs(a.rate - b.rate) <= 3 * math.sqrt(p * (1 - p) / 5000)

    def test_row_rate(self):
        assert RejectionRow(100, 0.05, 3, 12).rate == 0.25


class TestAsymptoteComparison:
    def test_row_count_and_order(self):
        rows = asymptote_comparison((50, 80, 120), 4, H, master_seed=1, threads=2)
        assert len(rows) == 12
        assert [(r.n, r.trial) for r in rows] == [(n, t) for n in (50, 80, 120) for t in range(4)]

    def test_empty(self):
        assert asymptote_comparison((200, 400), 0, H) == []

    def test_same_samples_as_rejection_table(self):
        rows = asymptote_comparison((70,), 5, H, master_seed=9, threads=1)
        gaps = null_gaps(70, 5, H, master_seed=9, threads=1)
        np.testing.assert_array_equal([r.delta_f_numeric for r in rows], gaps)


class TestTrimSum:
    def test_top_sum(self):
        x = np.array([3.0, -1.0, 7.0, 2.0, 5.0])
        assert top_sum(x, 2) == 12.0
        assert top_sum(x, 5) == 16.0

    def test_boundary_n1(self):
        s = trimsum_experiment(50, 49, 3, master_seed=2)
        assert s.reps == 3
        with pytest.raises(ValueError):
            trimsum_experiment(50, 50, 3)
        with pytest.raises(ValueError):
            trimsum_experiment(50, 0, 3)

    def test_full_minus_one_is_sum_minus_min(self):
        s = trimsum_experiment(20, 19, 1, master_seed=6)
        x = sample_null(20, mix_seed(6, 20, 19, 0)).values
        assert s.empirical_mean == pytest.approx(x.sum() - x.min(), abs=1e-12)

    def test_summary_ratio(self):
        s = trimsum_experiment(10**4, 100, 20, master_seed=1)
        assert s.ratio_to_asymptote == s.empirical_mean / s.asymptote
        assert s.empirical_mean == pytest.approx(s.exact_expectation, rel=0.05)


def test_parallel_map_preserves_order():
    assert parallel_map(lambda v: v * v, range(30), 4) == [v * v for v in range(30)]
    with pytest.raises(ValueError):
        parallel_map(abs, [1], -2)
