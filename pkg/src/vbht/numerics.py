"""Special functions used throughout the package.

Everything here is a pure function of its arguments. ``ln_gamma`` and the
normal distribution helpers wrap the C99 routines exposed by :mod:`math` and
:class:`statistics.NormalDist`; ``digamma`` is implemented locally (shift by
recurrence, then the asymptotic series) because the standard library has no
equivalent. The plain-float digamma kernel is also compiled with numba for use
inside the VB-EM sweep.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numba

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_STD_NORMAL = NormalDist()

# Bernoulli coefficients B_{2k} / (2k) for the digamma asymptotic series.
_PSI_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_PSI_SHIFT = 10.0


def _digamma_core(x):
    acc = 0.0
    while x < _PSI_SHIFT:
        acc += 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Horner evaluation of sum_k c_k x^{-2k}
    series = 0.0
    for k in range(len(_PSI_COEFFS) - 1, -1, -1):
        series = series * inv2 + _PSI_COEFFS[k]
    series *= inv2
    return math.log(x) - 0.5 / x - series - acc


digamma_nb = numba.njit(cache=True, nogil=True)(_digamma_core)


def _check_positive(x: float, name: str) -> float:
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise ValueError(f"{name} requires a finite positive argument, got {x!r}")
    return x


def _check_open_unit(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"{name} requires 0 < p < 1, got {p!r}")
    return p


def check_probability(p: float, name: str = "probability") -> float:
    """Return ``p`` as a float, raising ``ValueError`` outside ``[0, 1]``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    return math.lgamma(_check_positive(x, "ln_gamma"))


def digamma(x: float) -> float:
    """Digamma function psi(x) = d/dx ln Gamma(x) for ``x > 0``."""
    return _digamma_core(_check_positive(x, "digamma"))


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x - _LOG_SQRT_2PI)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate in both tails via ``erfc``."""
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` on the open unit interval."""
    return _STD_NORMAL.inv_cdf(_check_open_unit(p, "std_normal_quantile"))


def chi2_1_quantile(p: float) -> float:
    """Quantile of the chi-squared distribution with one degree of freedom.

    Uses ``P(xi**2 <= q) = p`` for standard normal ``xi``, so that
    ``q = Phi^{-1}((1 + p) / 2)**2``.
    """
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"chi2_1_quantile requires 0 <= p < 1, got {p!r}")
    if p == 0.0:
        return 0.0
    return std_normal_quantile(0.5 * (1.0 + p)) ** 2


def chi2_1_isf(alpha: float) -> float:
    """Upper-tail quantile: ``q`` with ``P(xi**2 > q) = alpha``.

    Equivalent to ``chi2_1_quantile(1 - alpha)`` but without forming ``1 - alpha``,
    so small levels keep full precision.
    """
    alpha = _check_open_unit(alpha, "chi2_1_isf")
    return std_normal_quantile(0.5 * alpha) ** 2


def chi2_1_cdf(q: float) -> float:
    if q <= 0.0:
        return 0.0
    return 2.0 * std_normal_cdf(math.sqrt(q)) - 1.0


def chi2_1_sf(q: float) -> float:
    """Survival function ``P(xi**2 > q)``, computed from the lower normal tail."""
    if q <= 0.0:
        return 1.0
    return 2.0 * std_normal_cdf(-math.sqrt(q))
