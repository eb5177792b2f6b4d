"""Two-component normal mixture and its exact finite-n variational quantities.

The model is ``(1 - a) N(0, 1) + a N(b, 1)`` with a symmetric Dirichlet(phi)
prior on the weights and ``b ~ N(0, sigma2)``. Under the mean-field factorisation
the free energy depends on the data only through the responsibilities
``y1[i] = E_q[y_i1]``; the posterior over ``(a, b)`` is available in closed form
given them.

All quantities are expressed relative to the null free energy ``F0``, i.e. the
statistic is ``delta F = F - F0``. The absolute ``F`` is only offered as
``delta F + F0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .numerics import digamma, ln_gamma

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Sample:
    """Observed one-dimensional data ``X_1..X_n``. Stored as a read-only copy."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size < 1:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class Hyperparameters:
    """Dirichlet concentration ``phi`` and prior variance ``sigma2`` of ``b``."""

    phi: float = 20.0
    sigma2: float = 1.0

    def __post_init__(self):
        for name in ("phi", "sigma2"):
            val = float(getattr(self, name))
            if not (val > 0.0 and math.isfinite(val)):
                raise ValueError(f"{name} must be finite and positive, got {val!r}")
            object.__setattr__(self, name, val)

    @property
    def prior_log_norm(self) -> float:
        """``ln Gamma(2 phi) - 2 ln Gamma(phi)``, the Dirichlet normaliser."""
        return ln_gamma(2.0 * self.phi) - 2.0 * ln_gamma(self.phi)


@dataclass(frozen=True)
class Responsibilities:
    """Per-observation probability of belonging to the shifted component.

    Only ``y1`` is stored; the null-component responsibility is ``1 - y1``.
    """

    y1: np.ndarray

    def __post_init__(self):
        y = np.array(self.y1, dtype=np.float64).reshape(-1)
        if np.any(np.isnan(y)) or np.any(y < 0.0) or np.any(y > 1.0):
            raise ValueError("responsibilities must lie in [0, 1]")
        y.setflags(write=False)
        object.__setattr__(self, "y1", y)

    @property
    def mass(self) -> float:
        """``n1 = sum_i y1[i]``."""
        return float(self.y1.sum())

    def __len__(self) -> int:
        return int(self.y1.size)


@dataclass(frozen=True)
class PosteriorMoments:
    b_mean: float
    b_second: float
    log_w0: float
    log_w1: float

    @property
    def b_var(self) -> float:
        return self.b_second - self.b_mean * self.b_mean


@dataclass(frozen=True)
class MixtureParams:
    a: float
    b: float

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"mixing weight must lie in [0, 1], got {self.a!r}")


def _check_lengths(sample: Sample, resp: Responsibilities) -> None:
    if len(resp) != sample.n:
        raise ValueError(
            f"responsibilities have length {len(resp)}, sample has n={sample.n}"
        )


def b_moments(
    sample: Sample, resp: Responsibilities, hyper: Hyperparameters
) -> tuple[float, float]:
    """Posterior mean and second moment of ``b`` given the responsibilities.

    Returns:
        ``(<b>, <b^2>)`` with ``<b> = sum(X y1) / (n1 + 1/sigma2)`` and
        ``<b^2> = <b>^2 + 1 / (n1 + 1/sigma2)``.
    """
    _check_lengths(sample, resp)
    precision = resp.mass + 1.0 / hyper.sigma2
    mean = float(sample.values @ resp.y1) / precision
    return mean, mean * mean + 1.0 / precision


def log_mix_weights(
    resp: Responsibilities, hyper: Hyperparameters
) -> tuple[float, float]:
    """Expected log mixing weights ``(<log a_0>, <log a_1>)`` under Dirichlet(phi)."""
    n = len(resp)
    n1 = resp.mass
    # n1 may exceed n by rounding; keep both digamma arguments positive
    n1 = min(max(n1, 0.0), float(n))
    total = digamma(n + 2.0 * hyper.phi)
    return digamma(n - n1 + hyper.phi) - total, digamma(n1 + hyper.phi) - total


def posterior_moments(
    sample: Sample, resp: Responsibilities, hyper: Hyperparameters
) -> PosteriorMoments:
    b_mean, b_second = b_moments(sample, resp, hyper)
    log_w0, log_w1 = log_mix_weights(resp, hyper)
    return PosteriorMoments(b_mean, b_second, log_w0, log_w1)


def responsibility_update(sample: Sample, moments: PosteriorMoments) -> Responsibilities:
    """Mean-field update of the responsibilities given the posterior moments.

    The two unnormalised log-weights are ``log_w1 - ((X - <b>)^2 + Var b) / 2``
    and ``log_w0 - X^2 / 2``; the larger one is factored out before
    exponentiating so extreme weight ratios underflow to 0 rather than NaN.
    """
    x = sample.values
    log_s = moments.log_w1 - 0.5 * ((x - moments.b_mean) ** 2 + moments.b_var)
    log_t = moments.log_w0 - 0.5 * x * x
    top = np.maximum(log_s, log_t)
    s = np.exp(log_s - top)
    t = np.exp(log_t - top)
    return Responsibilities(s / (s + t))


def entropy_term(y1: np.ndarray) -> float:
    """``sum_i [y ln y + (1 - y) ln(1 - y)]`` with ``0 ln 0 = 0``."""
    return float(np.sum(xlogy(y1, y1) + xlogy(1.0 - y1, 1.0 - y1)))


def free_energy_gap(
    sample: Sample, resp: Responsibilities, hyper: Hyperparameters
) -> float:
    """Variational free energy relative to the null, ``delta F = F - F0``.

    This is the exact finite-n value for the Dirichlet(phi) weight prior, with
    the posterior over ``(a, b)`` already optimised out for the given
    responsibilities.
    """
    _check_lengths(sample, resp)
    n = sample.n
    n1 = min(max(resp.mass, 0.0), float(n))
    phi, sigma2 = hyper.phi, hyper.sigma2
    s = float(sample.values @ resp.y1)
    return (
        entropy_term(resp.y1)
        + ln_gamma(n + 2.0 * phi)
        - ln_gamma(n1 + phi)
        - ln_gamma(n - n1 + phi)
        + 0.5 * math.log1p(sigma2 * n1)
        - 0.5 * s * s / (n1 + 1.0 / sigma2)
        - hyper.prior_log_norm
    )


def null_free_energy(sample: Sample) -> float:
    """``F0 = sum(X^2) / 2 + (n / 2) ln(2 pi)``: the exact null free energy."""
    x = sample.values
    return 0.5 * float(x @ x) + 0.5 * sample.n * _LOG_2PI


def free_energy(sample: Sample, resp: Responsibilities, hyper: Hyperparameters) -> float:
    return free_energy_gap(sample, resp, hyper) + null_free_energy(sample)


def mixture_log_density(x, params: MixtureParams):
    """Log density of ``(1 - a) N(0, 1) + a N(b, 1)`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=np.float64)
    log0 = -0.5 * x * x - 0.5 * _LOG_2PI
    log1 = -0.5 * (x - params.b) ** 2 - 0.5 * _LOG_2PI
    if params.a == 0.0:
        out = log0
    elif params.a == 1.0:
        out = log1
    else:
        out = np.logaddexp(math.log1p(-params.a) + log0, math.log(params.a) + log1)
    return out[()] if out.ndim == 0 else out
