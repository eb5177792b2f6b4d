"""The VB homogeneity test.

Under the null the gap behaves like ``D - xi**2 / 2`` with ``xi ~ N(0, 1)``, so
homogeneity is rejected at level ``alpha`` when the observed gap falls below
``D - chi2_1^{-1}(1 - alpha) / 2``. Small gaps mean the two-component model
explains the data unexpectedly well.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .asymptotics import deterministic_term, xi_hat
from .model import Hyperparameters, Sample
from .numerics import check_probability, chi2_1_isf, chi2_1_sf
from .solver import SolverConfig, solve


@dataclass(frozen=True)
class TestReport:
    """Outcome of :func:`run_test`. Field order is the JSON key order."""

    __test__ = False  # keep pytest from collecting this as a test class

    n: int
    phi: float
    sigma2: float
    delta_f: float
    d_term: float
    xi_hat: float
    level: float
    threshold: float
    p_value: float
    reject: bool
    n1: float
    b_mean: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)


def _check_level(level: float) -> float:
    level = check_probability(level, "level")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie strictly between 0 and 1, got {level!r}")
    return level


def threshold(n: int, hyper: Hyperparameters, level: float) -> float:
    """Reject homogeneity when the gap is below this value."""
    level = _check_level(level)
    return deterministic_term(n, hyper).d - 0.5 * chi2_1_isf(level)


def p_value(delta_f: float, n: int, hyper: Hyperparameters) -> float:
    """Asymptotic p-value: ``P(xi**2 / 2 > D - delta_f)``, and 1 when ``delta_f >= D``."""
    d = deterministic_term(n, hyper).d
    if not delta_f < d:
        return 1.0
    return chi2_1_sf(2.0 * (d - delta_f))


def run_test(
    sample: Sample,
    hyper: Hyperparameters = Hyperparameters(),
    config: SolverConfig = SolverConfig(),
    level: float = 0.05,
) -> TestReport:
    """Fit the VB free energy and compare it with the asymptotic threshold."""
    level = _check_level(level)
    d = deterministic_term(sample.n, hyper).d
    state = solve(sample, hyper, config)
    thr = d - 0.5 * chi2_1_isf(level)
    return TestReport(
        n=sample.n,
        phi=hyper.phi,
        sigma2=hyper.sigma2,
        delta_f=state.delta_f,
        d_term=d,
        xi_hat=xi_hat(sample),
        level=level,
        threshold=thr,
        p_value=p_value(state.delta_f, sample.n, hyper),
        reject=bool(state.delta_f < thr),
        n1=state.n1,
        b_mean=state.moments.b_mean,
        iterations=state.iterations,
        converged=state.converged,
    )
