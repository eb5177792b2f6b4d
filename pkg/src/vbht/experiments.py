"""Seeded Monte Carlo harness: rejection rates, asymptote comparison, trimmed sums.

Every trial owns its random stream. The key is ``mix_seed(master_seed, n,
trial)`` (a splitmix64 chain) and feeds numpy's counter-based Philox generator;
normal variates come from ``Generator.standard_normal`` (numpy's ziggurat).
Results therefore do not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .asymptotics import (
    asymptote_per_sample,
    trimmed_sum_asymptote,
    trimmed_sum_expectation,
)
from .hypothesis import threshold
from .model import Hyperparameters, MixtureParams, Sample
from .numerics import check_probability
from .solver import SolverConfig, solve

_MASK64 = (1 << 64) - 1
# domain separator between the data stream and the solver's restart stream
_SOLVER_STREAM = 0x736F6C766572


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master_seed: int, *parts: int) -> int:
    """Stable 64-bit key derived from a master seed and integer coordinates."""
    h = _splitmix64(master_seed & _MASK64)
    for p in parts:
        h = _splitmix64(h ^ (p & _MASK64))
    return h


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def sample_null(n: int, seed: int) -> Sample:
    """``n`` i.i.d. standard normal draws keyed by ``seed``."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return Sample(_generator(seed).standard_normal(n))


def sample_mixture(n: int, params: MixtureParams, seed: int) -> Sample:
    """Draws from ``(1 - a) N(0, 1) + a N(b, 1)``.

    The standard normal part is the same stream :func:`sample_null` uses, so
    ``a = 0`` reproduces it exactly; component labels come from later draws.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = _generator(seed)
    z = rng.standard_normal(n)
    shifted = rng.uniform(size=n) < params.a
    return Sample(z + params.b * shifted)


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence, threads: int = 0) -> list:
    """Order-preserving map; the compiled solver releases the GIL."""
    threads = _resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ExperimentGrid:
    sample_sizes: tuple[int, ...] = (100, 200, 400, 800)
    trials: int = 5000
    levels: tuple[float, ...] = (0.10, 0.05, 0.01)
    hyper: Hyperparameters = field(default_factory=Hyperparameters)
    master_seed: int = 0
    threads: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(
            self, "levels", tuple(check_probability(l, "level") for l in self.levels)
        )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if any(n < 2 for n in self.sample_sizes):
            raise ValueError("all sample sizes must be >= 2")
        if any(not 0.0 < l < 1.0 for l in self.levels):
            raise ValueError("levels must lie strictly between 0 and 1")
        _resolve_threads(self.threads)


@dataclass(frozen=True)
class RejectionRow:
    n: int
    level: float
    rejected: int
    trials: int

    @property
    def rate(self) -> float:
        return self.rejected / self.trials


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    trial: int
    delta_f_numeric: float
    delta_f_asymptote: float


@dataclass(frozen=True)
class TrimSumSummary:
    n: int
    n1: int
    reps: int
    empirical_mean: float
    asymptote: float
    exact_expectation: float

    @property
    def ratio_to_asymptote(self) -> float:
        return self.empirical_mean / self.asymptote


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    return mix_seed(master_seed, n, trial)


def null_trial(
    n: int, trial: int, hyper: Hyperparameters, config: SolverConfig, master_seed: int
):
    """Draw the ``trial``-th null sample of size ``n`` and solve it."""
    seed = trial_seed(master_seed, n, trial)
    sample = sample_null(n, seed)
    state = solve(sample, hyper, replace(config, seed=mix_seed(seed, _SOLVER_STREAM)))
    return sample, state


def null_gaps(
    n: int,
    trials: int,
    hyper: Hyperparameters,
    config: SolverConfig = SolverConfig(),
    master_seed: int = 0,
    threads: int = 0,
) -> np.ndarray:
    """Minimised gaps for ``trials`` independent null samples of size ``n``."""

    def one(trial):
        return null_trial(n, trial, hyper, config, master_seed)[1].delta_f

    return np.array(parallel_map(one, range(trials), threads))


def rejection_table(
    grid: ExperimentGrid, config: SolverConfig = SolverConfig()
) -> list[RejectionRow]:
    """Empirical rejection rates of the VB test under the null.

    Each null sample is solved once; its gap is compared with the threshold of
    every requested level (exactly the decision ``run_test`` would make).
    """
    rows = []
    for n in grid.sample_sizes:
        thresholds = [threshold(n, grid.hyper, level) for level in grid.levels]
        gaps = null_gaps(n, grid.trials, grid.hyper, config, grid.master_seed, grid.threads)
        for level, thr in zip(grid.levels, thresholds):
            rows.append(RejectionRow(n, level, int(np.sum(gaps < thr)), grid.trials))
    return rows


def asymptote_comparison(
    sample_sizes: Sequence[int],
    sets_per_size: int,
    hyper: Hyperparameters = Hyperparameters(),
    config: SolverConfig = SolverConfig(),
    master_seed: int = 0,
    threads: int = 0,
) -> list[ComparisonRow]:
    """Numerically minimised gap next to its asymptotic prediction, per null sample."""
    if sets_per_size < 0:
        raise ValueError(f"sets_per_size must be >= 0, got {sets_per_size}")
    work = [(int(n), t) for n in sample_sizes for t in range(sets_per_size)]

    def one(item):
        n, trial = item
        sample, state = null_trial(n, trial, hyper, config, master_seed)
        return ComparisonRow(n, trial, state.delta_f, asymptote_per_sample(sample, hyper))

    return parallel_map(one, work, threads)


def top_sum(x: np.ndarray, k: int) -> float:
    """Sum of the ``k`` largest entries via introselect (no full sort)."""
    n = x.size
    if k >= n:
        return float(x.sum())
    return float(np.partition(x, n - k)[n - k :].sum())


def trimsum_experiment(n: int, n1: int, reps: int, master_seed: int = 0) -> TrimSumSummary:
    """Average top-``n1`` sum of ``n`` standard normals over ``reps`` draws."""
    if not 1 <= n1 < n:
        raise ValueError(f"need 1 <= n1 < n, got n={n}, n1={n1}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    total = 0.0
    for rep in range(reps):
        x = _generator(mix_seed(master_seed, n, n1, rep)).standard_normal(n)
        total += top_sum(x, n1)
    return TrimSumSummary(
        n=n,
        n1=n1,
        reps=reps,
        empirical_mean=total / reps,
        asymptote=trimmed_sum_asymptote(n, n1),
        exact_expectation=trimmed_sum_expectation(n, n1),
    )
