"""Command-line front end.

Exit codes: 0 when the command ran (a test decision lives in the payload),
2 for usage or input errors, 3 for ``test --strict`` without convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import svg
from .asymptotics import PHI_CRITICAL, alpha_curve
from .experiments import (
    ExperimentGrid,
    asymptote_comparison,
    rejection_table,
    trimsum_experiment,
)
from .hypothesis import run_test
from .model import Hyperparameters, Sample
from .solver import SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 2, 3
SEED_ENV = "VBHT_SEED"


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """Fixed CSV number format: integers verbatim, floats to 9 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def read_observations(text: str) -> np.ndarray:
    """Parse newline-delimited floats; ``#`` lines and blank lines are skipped.

    A non-numeric first data line is taken as a single-column CSV header.
    """
    values = []
    first = True
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            v = float(line)
        except ValueError:
            if first and "," not in line:
                first = False
                continue
            raise UsageError(f"line {lineno}: cannot parse {line!r} as a number")
        first = False
        if not math.isfinite(v):
            raise UsageError(f"line {lineno}: non-finite value {line!r}")
        values.append(v)
    return np.array(values, dtype=np.float64)


def _load_sample(path: str) -> Sample:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not UTF-8 text")
    x = read_observations(text)
    if x.size < 2:
        raise UsageError("need at least 2 observations")
    return Sample(x)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vbht",
        description="Variational Bayes test of homogeneity for two-component normal mixtures.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--phi", type=float, default=20.0,
                        help="Dirichlet concentration (default 20)")
    common.add_argument("--sigma2", type=float, default=1.0,
                        help="prior variance of the component mean (default 1)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default ${SEED_ENV} or 0)")
    common.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--max-iters", type=int, default=2000)
    common.add_argument("--restarts", type=int, default=4)
    common.add_argument("-o", "--output", help="write CSV here instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", parents=[common], help="run the VB test on a data file")
    p.add_argument("input", help="newline-delimited observations, '-' for stdin")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 if the solver did not converge")

    p = sub.add_parser("fit", parents=[common], help="fit the VB posterior only")
    p.add_argument("input")

    p = sub.add_parser("simulate", parents=[common], help="null rejection-rate table")
    p.add_argument("--n", type=_int_list, default=[100, 200, 400, 800])
    p.add_argument("--levels", type=_float_list, default=[0.10, 0.05, 0.01])
    p.add_argument("--trials", type=int, default=5000)

    p = sub.add_parser("asymptote", parents=[common],
                       help="VB-EM gap versus its asymptote on null samples")
    p.add_argument("--n", type=_int_list, default=[200, 400, 800, 1600, 3200, 6400])
    p.add_argument("--sets", type=int, default=100)
    p.add_argument("--svg")

    p = sub.add_parser("trimsum", parents=[common],
                       help="sum of the n1 largest of n normal draws")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--n1", type=int, default=1000)
    p.add_argument("--reps", type=int, default=100)

    p = sub.add_parser("alpha-curve", parents=[common],
                       help="limiting bulk fraction alpha0 as a function of phi")
    p.add_argument("--phi-grid", type=_float_list,
                   help="explicit comma-separated phi values")
    p.add_argument("--phi-max", type=float, default=20.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--svg")
    return parser


def _validate(args) -> None:
    if not (args.sigma2 > 0 and math.isfinite(args.sigma2)):
        raise UsageError("--sigma2 must be positive")
    if not args.phi > 0:
        raise UsageError("--phi must be positive")
    needs_bulk = args.command in ("test", "simulate", "asymptote")
    if needs_bulk and not args.phi > PHI_CRITICAL:
        raise UsageError(
            f"--phi {args.phi:g} is at or below the phase boundary: the test needs "
            f"phi > {PHI_CRITICAL:g}"
        )
    if not args.tol > 0 or args.max_iters < 1 or args.restarts < 0:
        raise UsageError("need --tol > 0, --max-iters >= 1 and --restarts >= 0")
    if args.threads < 0:
        raise UsageError("--threads must be >= 0")
    if args.seed is None:
        args.seed = _default_seed()
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")

    if args.command == "test" and not 0.0 < args.level < 1.0:
        raise UsageError("--level must lie strictly between 0 and 1")
    if args.command == "simulate":
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        if not args.n or any(n < 2 for n in args.n):
            raise UsageError("--n needs sample sizes >= 2")
        if not args.levels or any(not 0.0 < l < 1.0 for l in args.levels):
            raise UsageError("--levels must lie strictly between 0 and 1")
    if args.command == "asymptote":
        if args.sets < 0:
            raise UsageError("--sets must be >= 0")
        if not args.n or any(n < 2 for n in args.n):
            raise UsageError("--n needs sample sizes >= 2")
    if args.command == "trimsum":
        if not 1 <= args.n1 < args.n:
            raise UsageError("need 1 <= --n1 < --n")
        if args.reps < 1:
            raise UsageError("--reps must be >= 1")
    if args.command == "alpha-curve":
        if args.phi_grid is not None:
            if not args.phi_grid or any(not p > PHI_CRITICAL for p in args.phi_grid):
                raise UsageError("every --phi-grid value must exceed the phase boundary phi > 1")
        elif not args.phi_max > PHI_CRITICAL or args.points < 1:
            raise UsageError("need --phi-max > 1 and --points >= 1")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iters=args.max_iters,
                        restarts=args.restarts, seed=args.seed)


def _write_csv(args, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_test(args) -> int:
    sample = _load_sample(args.input)
    hyper = Hyperparameters(args.phi, args.sigma2)
    report = run_test(sample, hyper, _solver_config(args), args.level)
    sys.stdout.write(report.to_json() + "\n")
    if args.strict and not report.converged:
        print("solver did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_fit(args) -> int:
    sample = _load_sample(args.input)
    hyper = Hyperparameters(args.phi, args.sigma2)
    state = solve(sample, hyper, _solver_config(args))
    summary = {
        "n": sample.n,
        "phi": hyper.phi,
        "sigma2": hyper.sigma2,
        "delta_f": state.delta_f,
        "n1": state.n1,
        "b_mean": state.moments.b_mean,
        "b_second": state.moments.b_second,
        "log_w0": state.moments.log_w0,
        "log_w1": state.moments.log_w1,
        "iterations": state.iterations,
        "converged": state.converged,
    }
    sys.stdout.write(json.dumps(summary) + "\n")
    if args.output:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y1"])
        for x, y in zip(sample.values, state.resp.y1):
            w.writerow([fmt(x), fmt(y)])
        _write_text(args.output, buf.getvalue())
    return EXIT_OK


def cmd_simulate(args) -> int:
    grid = ExperimentGrid(
        sample_sizes=tuple(args.n),
        trials=args.trials,
        levels=tuple(args.levels),
        hyper=Hyperparameters(args.phi, args.sigma2),
        master_seed=args.seed,
        threads=args.threads,
    )
    rows = rejection_table(grid, _solver_config(args))
    _write_csv(args, ["n", "level", "trials", "rejected", "rate"],
               [(r.n, r.level, r.trials, r.rejected, r.rate) for r in rows])
    return EXIT_OK


def cmd_asymptote(args) -> int:
    hyper = Hyperparameters(args.phi, args.sigma2)
    rows = asymptote_comparison(args.n, args.sets, hyper, _solver_config(args),
                                args.seed, args.threads)
    _write_csv(args, ["n", "trial", "delta_f_numeric", "delta_f_asymptote"],
               [(r.n, r.trial, r.delta_f_numeric, r.delta_f_asymptote) for r in rows])
    if args.svg:
        chart = svg.render(
            [
                svg.Series("VB-EM (numeric)", [r.n for r in rows],
                           [r.delta_f_numeric for r in rows], "#1f4fbf", "circle"),
                svg.Series("asymptote", [r.n for r in rows],
                           [r.delta_f_asymptote for r in rows], "#c0392b", "triangle"),
            ],
            title=f"Free-energy gap vs sample size (phi = {args.phi:g})",
            xlabel="n",
            ylabel="F - F0",
            log_x=True,
        )
        _write_text(args.svg, chart)
    return EXIT_OK


def cmd_trimsum(args) -> int:
    s = trimsum_experiment(args.n, args.n1, args.reps, args.seed)
    _write_csv(
        args,
        ["n", "n1", "reps", "empirical_mean", "asymptote", "exact_expectation",
         "ratio_to_asymptote"],
        [(s.n, s.n1, s.reps, s.empirical_mean, s.asymptote, s.exact_expectation,
          s.ratio_to_asymptote)],
    )
    return EXIT_OK


def cmd_alpha_curve(args) -> int:
    if args.phi_grid is not None:
        phis = np.array(args.phi_grid, dtype=np.float64)
    else:
        k = np.arange(1, args.points + 1)
        phis = 1.0 + (args.phi_max - 1.0) * k / args.points
    alphas = alpha_curve(phis)
    _write_csv(args, ["phi", "alpha0"], zip(phis, alphas))
    if args.svg:
        chart = svg.render(
            [svg.Series("alpha0", list(phis), list(alphas), "#1f4fbf", "line")],
            title="Limiting bulk fraction alpha0(phi)",
            xlabel="phi",
            ylabel="alpha0",
        )
        _write_text(args.svg, chart)
    return EXIT_OK


COMMANDS = {
    "test": cmd_test,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "asymptote": cmd_asymptote,
    "trimsum": cmd_trimsum,
    "alpha-curve": cmd_alpha_curve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vbht {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
