"""Closed-form large-n behaviour of the free-energy gap.

For ``phi > 1`` the minimising configuration keeps a bulk fraction
``alpha0 = (phi - 1) / (2 phi - 3/2)`` of the sample in the shifted component,
and the gap behaves like ``D - xi**2 / 2`` with ``xi = sum(X) / sqrt(n)``
asymptotically standard normal under the null. ``D`` is evaluated here by
substituting ``alpha0`` into the bulk-configuration expansion

    ln n + (1 - phi) ln a - (phi - 1/2) ln(1 - a) + ln(sigma2)/2 - ln(2 pi)/2
         - [ln Gamma(2 phi) - 2 ln Gamma(phi)].

For ``phi < 1`` the minimiser instead concentrates a vanishing mass on a few
extreme observations; only the leading order is known there. The trimmed-sum
helpers at the bottom support that regime: they describe the sum of the
``n1`` largest of ``n`` standard normal draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Hyperparameters, Sample
from .numerics import std_normal_pdf, std_normal_quantile

PHI_CRITICAL = 1.0
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class AsymptoteTerm:
    """Deterministic part ``d`` of the gap at sample size ``n``."""

    d: float
    n: int
    phi: float
    sigma2: float


@dataclass(frozen=True)
class OrderStatConstants:
    """Location ``a_n`` and scale ``b_n`` of the ``n1``-th largest order statistic."""

    a_n: float
    b_n: float


def _require_bulk_phase(phi: float) -> None:
    if not phi > PHI_CRITICAL:
        raise ValueError(
            f"phi={phi!r} is not above the phase boundary phi > {PHI_CRITICAL:g}; "
            "the O(1) asymptote only exists in the bulk-mass phase"
        )


def alpha_star(phi: float) -> float:
    """Limiting fraction ``n1 / n`` of the minimising configuration, ``phi > 1``."""
    _require_bulk_phase(phi)
    return (phi - 1.0) / (2.0 * phi - 1.5)


def _phi_constant(phi: float) -> float:
    # everything in D that depends on phi alone
    a = alpha_star(phi)
    prior_norm = math.lgamma(2.0 * phi) - 2.0 * math.lgamma(phi)
    return (
        (1.0 - phi) * math.log(a)
        - (phi - 0.5) * math.log1p(-a)
        - 0.5 * _LOG_2PI
        - prior_norm
    )


def deterministic_term(n: int, hyper: Hyperparameters) -> AsymptoteTerm:
    """The non-random part ``D`` of the large-n gap, ``delta F ~ D - xi**2 / 2``."""
    _require_bulk_phase(hyper.phi)
    if n < 2:
        raise ValueError(f"deterministic_term needs n >= 2, got {n}")
    d = math.log(n) + 0.5 * math.log(hyper.sigma2) + _phi_constant(hyper.phi)
    return AsymptoteTerm(d=d, n=int(n), phi=hyper.phi, sigma2=hyper.sigma2)


def xi_hat(sample: Sample) -> float:
    """``sum(X) / sqrt(n)``, the realised value of the asymptotic N(0, 1) term."""
    return math.fsum(sample.values) / math.sqrt(sample.n)


def asymptote_per_sample(sample: Sample, hyper: Hyperparameters) -> float:
    """Asymptotic prediction ``D - xi_hat**2 / 2`` of the gap for this sample."""
    xi = xi_hat(sample)
    return deterministic_term(sample.n, hyper).d - 0.5 * xi * xi


def leading_order(n: int, n1: float, phi: float) -> float:
    """Leading-order gap for a configuration of mass ``n1``.

    Small-mass configurations (``n1 / n < 1/2``) give
    ``phi ln(n / n1) + ln n1``; bulk ones give ``ln n``. Both are only accurate
    up to O_p(1) and serve as diagnostics.
    """
    if n < 2 or not 0.0 < n1 <= n:
        raise ValueError(f"leading_order needs n >= 2 and 0 < n1 <= n, got {n}, {n1}")
    if n1 / n < 0.5:
        return phi * math.log(n / n1) + math.log(n1)
    return math.log(n)


def _check_trim(n: int, n1: int) -> None:
    if not 1 <= n1 < n:
        raise ValueError(f"need 1 <= n1 < n, got n={n}, n1={n1}")


def trimmed_sum_asymptote(n: int, n1: int) -> float:
    """Leading asymptote ``n1 sqrt(2 ln(n / n1))`` of the top-``n1`` sum."""
    _check_trim(n, n1)
    return n1 * math.sqrt(2.0 * math.log(n / n1))


def trimmed_sum_expectation(n: int, n1: int) -> float:
    """``n * pdf(Phi^{-1}(1 - n1/n))``: the expected top-``n1`` sum to leading order.

    This is ``n`` times the integral of ``x pdf(x)`` above the ``1 - n1/n``
    quantile, i.e. the mean of the trimmed sum up to order-statistic
    fluctuations.
    """
    _check_trim(n, n1)
    return n * std_normal_pdf(std_normal_quantile(1.0 - n1 / n))


def order_stat_constants(n: int, n1: int) -> OrderStatConstants:
    """Exact normalising constants for the ``n1``-th largest normal order statistic."""
    _check_trim(n, n1)
    if not n / n1 > math.e:
        raise ValueError(f"need n / n1 > e, got {n / n1!r}")
    a_n = std_normal_quantile(1.0 - n1 / n)
    b_n = math.sqrt(n1) / (n * std_normal_pdf(a_n))
    return OrderStatConstants(a_n=a_n, b_n=b_n)


def approx_order_stat_location(n: int, n1: int) -> float:
    """Large-ratio approximation ``sqrt(2 ln r - ln((ln r)^2))`` of ``a_n``, ``r = n/n1``.

    Coarser than :func:`order_stat_constants`; kept for comparison only.
    """
    _check_trim(n, n1)
    r = n / n1
    if not r > math.e:
        raise ValueError(f"need n / n1 > e, got {r!r}")
    lr = math.log(r)
    return math.sqrt(2.0 * lr - math.log(lr * lr))


def alpha_curve(phis) -> np.ndarray:
    """Vectorised :func:`alpha_star` over a grid of ``phi > 1`` values."""
    phis = np.asarray(phis, dtype=np.float64)
    if np.any(~(phis > PHI_CRITICAL)):
        raise ValueError("every phi in the grid must exceed 1")
    return (phis - 1.0) / (2.0 * phis - 1.5)
