"""VB-EM fixed-point iteration for the two-component free energy.

One sweep recomputes the expected log weights and the posterior of ``b`` from
the current responsibilities, then refreshes every responsibility. Each sweep
is an exact coordinate minimisation of the variational objective, so the gap
``delta F`` never increases along a trajectory.

Given the moments, the update is ``y1[i] = expit(c + <b> X_i)`` with a scalar
``c``, so a sweep only needs ``n1 = sum(y1)`` and ``sum(X y1)`` from the
previous state. :func:`solve` exploits this with a compiled kernel that fuses
the update and the free-energy evaluation into one pass over the data;
:func:`iterate_once` is the same sweep written against the :mod:`vbht.model`
functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, gammaln, xlogy

from .asymptotics import PHI_CRITICAL, alpha_star
from .model import (
    Hyperparameters,
    PosteriorMoments,
    Responsibilities,
    Sample,
    free_energy_gap,
    posterior_moments,
    responsibility_update,
)
from .numerics import digamma_nb

ORACLE_MAX_N = 3


@dataclass(frozen=True)
class SolverConfig:
    """Convergence control for :func:`solve`.

    Attributes:
        tol: stop once ``|delta F|`` changes by less than this between sweeps.
        max_iters: sweep budget per initialisation.
        restarts: number of uniform-random initialisations on top of the two
            deterministic ones.
        seed: key for the random initialisations.
    """

    tol: float = 1e-9
    max_iters: int = 2000
    restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters!r}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be >= 0, got {self.restarts!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class VBState:
    resp: Responsibilities
    moments: PosteriorMoments
    delta_f: float
    iterations: int = 0
    converged: bool = False

    @property
    def n1(self) -> float:
        return self.resp.mass


def make_state(
    sample: Sample,
    resp: Responsibilities,
    hyper: Hyperparameters,
    iterations: int = 0,
    converged: bool = False,
) -> VBState:
    """Wrap responsibilities with the moments and gap they imply."""
    return VBState(
        resp=resp,
        moments=posterior_moments(sample, resp, hyper),
        delta_f=free_energy_gap(sample, resp, hyper),
        iterations=iterations,
        converged=converged,
    )


def iterate_once(sample: Sample, state: VBState, hyper: Hyperparameters) -> VBState:
    """One VB-EM sweep: weights and ``b`` moments, then responsibilities, then gap."""
    moments = posterior_moments(sample, state.resp, hyper)
    resp = responsibility_update(sample, moments)
    return make_state(sample, resp, hyper, iterations=state.iterations + 1)


# ---------------------------------------------------------------------------
# compiled kernel


@numba.njit(cache=True, nogil=True)
def _entropy(y):
    acc = 0.0
    for i in range(y.size):
        v = y[i]
        if v > 0.0:
            acc += v * math.log(v)
        if v < 1.0:
            acc += (1.0 - v) * math.log1p(-v)
    return acc


@numba.njit(cache=True, nogil=True)
def _gap(n, n1, s, ent, phi, sigma2, prior_norm):
    n1 = min(max(n1, 0.0), n)
    return (
        ent
        + math.lgamma(n + 2.0 * phi)
        - math.lgamma(n1 + phi)
        - math.lgamma(n - n1 + phi)
        + 0.5 * math.log1p(sigma2 * n1)
        - 0.5 * s * s / (n1 + 1.0 / sigma2)
        - prior_norm
    )


@numba.njit(cache=True, nogil=True)
def _sweep(x, y, phi, sigma2, n1, s):
    n = float(x.size)
    n1 = min(max(n1, 0.0), n)
    precision = n1 + 1.0 / sigma2
    m = s / precision
    psi_total = digamma_nb(n + 2.0 * phi)
    log_w1 = digamma_nb(n1 + phi) - psi_total
    log_w0 = digamma_nb(n - n1 + phi) - psi_total
    c = log_w1 - log_w0 - 0.5 * m * m - 0.5 / precision
    n1_new = 0.0
    s_new = 0.0
    ent = 0.0
    for i in range(x.size):
        z = c + m * x[i]
        az = abs(z)
        e = math.exp(-az)
        small = e / (1.0 + e)
        # y ln y + (1-y) ln(1-y) written in terms of the smaller probability
        ent += -small * az - math.log1p(e)
        yi = 1.0 / (1.0 + e) if z >= 0.0 else small
        y[i] = yi
        n1_new += yi
        s_new += x[i] * yi
    return n1_new, s_new, ent


@numba.njit(cache=True, nogil=True)
def _run(x, y, phi, sigma2, prior_norm, tol, max_iters):
    n = float(x.size)
    n1 = 0.0
    s = 0.0
    for i in range(x.size):
        n1 += y[i]
        s += x[i] * y[i]
    f = _gap(n, n1, s, _entropy(y), phi, sigma2, prior_norm)
    it = 0
    converged = False
    while it < max_iters:
        n1, s, ent = _sweep(x, y, phi, sigma2, n1, s)
        it += 1
        g = _gap(n, n1, s, ent, phi, sigma2, prior_norm)
        done = abs(g - f) < tol
        f = g
        if done:
            converged = True
            break
    return f, it, converged


def run_from(
    sample: Sample, init: Responsibilities, hyper: Hyperparameters, config: SolverConfig
) -> VBState:
    """Iterate from one initialisation until converged or out of sweeps."""
    y = np.array(init.y1, dtype=np.float64)
    _, iters, converged = _run(
        sample.values,
        y,
        hyper.phi,
        hyper.sigma2,
        hyper.prior_log_norm,
        config.tol,
        config.max_iters,
    )
    return make_state(sample, Responsibilities(y), hyper, iters, converged)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def initial_states(
    sample: Sample, hyper: Hyperparameters, config: SolverConfig
) -> list[Responsibilities]:
    """Starting points for :func:`solve`.

    1. constant ``alpha0(phi)`` for ``phi > 1``, else ``min(0.5, 10 / n)``;
    2. 0.9 on the ``ceil(sqrt(n))`` largest observations and 0.1 elsewhere;
    3. ``config.restarts`` uniform draws keyed by ``config.seed``.
    """
    n = sample.n
    level = alpha_star(hyper.phi) if hyper.phi > PHI_CRITICAL else min(0.5, 10.0 / n)
    inits = [Responsibilities(np.full(n, level))]

    top = np.full(n, 0.1)
    k = math.ceil(math.sqrt(n))
    top[np.argsort(sample.values, kind="stable")[n - k :]] = 0.9
    inits.append(Responsibilities(top))

    rng = _rng(config.seed)
    for _ in range(config.restarts):
        inits.append(Responsibilities(rng.uniform(size=n)))
    return inits


def solve(
    sample: Sample,
    hyper: Hyperparameters,
    config: SolverConfig = SolverConfig(),
    inits: Sequence[Responsibilities] | None = None,
) -> VBState:
    """Minimise the gap over all initialisations and keep the lowest.

    ``inits`` overrides :func:`initial_states`. Non-convergence is not an error:
    the returned state carries ``converged=False`` if the winning run used up
    its sweep budget.
    """
    if inits is None:
        inits = initial_states(sample, hyper, config)
    best = None
    for init in inits:
        state = run_from(sample, init, hyper, config)
        if best is None or state.delta_f < best.delta_f:
            best = state
    return best


# ---------------------------------------------------------------------------
# brute-force oracle for tiny samples


def _gap_rows(x: np.ndarray, y: np.ndarray, hyper: Hyperparameters) -> np.ndarray:
    """Gap for each row of ``y`` (shape ``(m, n)``), vectorised over rows."""
    n = x.size
    phi, sigma2 = hyper.phi, hyper.sigma2
    n1 = y.sum(axis=1)
    s = y @ x
    ent = np.sum(xlogy(y, y) + xlogy(1.0 - y, 1.0 - y), axis=1)
    return (
        ent
        + gammaln(n + 2 * phi)
        - gammaln(n1 + phi)
        - gammaln(n - n1 + phi)
        + 0.5 * np.log1p(sigma2 * n1)
        - 0.5 * s * s / (n1 + 1.0 / sigma2)
        - (gammaln(2 * phi) - 2 * gammaln(phi))
    )


def oracle_grid_min(
    sample: Sample, hyper: Hyperparameters, grid_points: int = 200, refine: int = 5
) -> float:
    """Global minimum of the gap by exhaustive search, for ``n <= 3``.

    Evaluates the gap on the midpoint grid of ``[0, 1]^n`` and polishes the
    ``refine`` best cells with Nelder-Mead in logit coordinates. Independent of
    the fixed-point iteration.
    """
    n = sample.n
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle_grid_min is exhaustive; n={n} > {ORACLE_MAX_N}")
    x = np.asarray(sample.values)
    axis = (np.arange(grid_points) + 0.5) / grid_points

    cand_vals, cand_pts = [], []
    if n == 1:
        slabs = [axis[:, None]]
    else:
        # one slab per leading coordinate keeps memory at grid_points^(n-1) rows
        rest = np.array(list(itertools.product(axis, repeat=n - 1)))
        slabs = (np.column_stack([np.full(len(rest), lead), rest]) for lead in axis)
    for rows in slabs:
        vals = _gap_rows(x, rows, hyper)
        order = np.argsort(vals)[:refine]
        cand_vals.extend(vals[order])
        cand_pts.extend(rows[order])
    order = np.argsort(cand_vals)[:refine]
    best = float(cand_vals[order[0]])

    def objective(logits):
        return float(_gap_rows(x, expit(logits)[None, :], hyper)[0])

    for idx in order:
        start = np.log(cand_pts[idx]) - np.log1p(-cand_pts[idx])
        for _ in range(3):
            simplex = np.vstack([start, start + 0.5 * np.eye(n)])
            res = minimize(
                objective,
                start,
                method="Nelder-Mead",
                options={
                    "initial_simplex": simplex,
                    "xatol": 1e-10,
                    "fatol": 1e-14,
                    "maxiter": 20000,
                },
            )
            start = res.x
        best = min(best, float(res.fun))
    return best
