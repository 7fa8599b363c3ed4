"""Command-line interface.

Subcommands: complete (fill a matrix from files), sweep (phase-transition
grid), bench (runtime versus rank), prox-curve (tabulate loss/prox/
regularizer curves), selftest (oracle and invariant suites).

Exit codes: 0 success/converged, 1 error (including usage), 2 iteration cap
hit, 3 selftest failure. Human-readable output goes to stderr; data goes to
files (or stdout for selftest --json).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import bench, matio, penalties, selftest
from .completion import SolverConfig, solve
from .errors import SirmcError, UsageError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITERS = 2
EXIT_SELFTEST = 3

THREADS_ENV = "SIRMC_THREADS"

PRESETS = {
    "paper-grid": (bench.PAPER_GRID, bench.PAPER_GRID),
    "broad-grid": (bench.BROAD_GRID, bench.BROAD_GRID),
    "transition-grid": (bench.TRANSITION_FR, bench.TRANSITION_FM),
}


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so exit codes stay ours."""

    def error(self, message):
        raise UsageError(message)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


@contextmanager
def _single_threaded_blas(enabled: bool):
    if not enabled:
        yield
        return
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        yield
        return
    with threadpool_limits(limits=1):
        yield


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("how", "hoc", "hog", "nnm"), default="how",
                   help="penalty / solver variant (default: how)")
    p.add_argument("--shape-ratio", type=float, default=None,
                   help="shape parameter over threshold; default is the kind's strict bound")
    p.add_argument("--rho0", type=float, default=1e-2, help="initial penalty parameter")
    p.add_argument("--mu", type=float, default=1.05, help="penalty growth factor")
    p.add_argument("--xi", type=float, default=1e-7, help="relative-error stopping tolerance")
    p.add_argument("--max-iters", type=int, default=1000, help="iteration cap")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--threads", type=int, default=None,
                   help=f"trial-level parallelism (default: ${THREADS_ENV} or 1)")
    p.add_argument("--deterministic", action="store_true",
                   help="sequential trials and single-threaded numerics")
    p.add_argument("--out", required=True, help="output file path")


def _resolve_threads(args) -> int:
    if args.deterministic:
        return 1
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"bad {THREADS_ENV} value {env!r}") from None
    return 1


def _solver_config(args) -> SolverConfig:
    kind = "soft" if args.method == "nnm" else args.method
    return SolverConfig(penalty_kind=kind, shape_ratio=args.shape_ratio,
                        rho0=args.rho0, mu=args.mu, xi=args.xi,
                        max_iters=args.max_iters)


def _parse_fractions(text: str, flag: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag}: empty list")
    return vals


def _parse_methods(text: str):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    for m in methods:
        if m not in bench.METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(bench.METHODS)}")
    return methods


def cmd_complete(args) -> int:
    X = matio.load_observed(args.matrix, args.mask)
    config = _solver_config(args)
    t0 = time.perf_counter()
    with _single_threaded_blas(args.deterministic):
        M, trace = solve(X, config)
    elapsed = time.perf_counter() - t0
    matio.save_matrix(M, args.out)
    trace.to_csv(args.out + ".trace.csv")
    _log(f"rel_E = {trace.rel_e[-1]:.3e} after {trace.iters} iterations "
         f"({elapsed:.2f}s); wrote {args.out}")
    if trace.max_iters_reached:
        _log("iteration cap reached before the tolerance")
        return EXIT_MAX_ITERS
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.preset is not None:
        fr_values, fm_values = PRESETS[args.preset]
    else:
        if args.fr_values is None or args.fm_values is None:
            raise UsageError("give --preset or both --fr-values and --fm-values")
        fr_values = _parse_fractions(args.fr_values, "--fr-values")
        fm_values = _parse_fractions(args.fm_values, "--fm-values")
    methods = _parse_methods(args.methods)
    configs = {m: bench.config_for_method(
        m, shape_ratio=args.shape_ratio, rho0=args.rho0, mu=args.mu,
        xi=args.xi, max_iters=args.max_iters) for m in methods}
    threads = _resolve_threads(args)
    with _single_threaded_blas(args.deterministic):
        grid = bench.phase_sweep(fr_values, fm_values, methods, args.trials,
                                 m=args.m, n=args.n, seed=args.seed,
                                 configs=configs, threads=threads)
    grid.to_csv(args.out)
    _log(f"swept {len(fr_values)}x{len(fm_values)} cells x {len(methods)} methods "
         f"x {args.trials} trials; wrote {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    try:
        ranks = tuple(int(r) for r in args.ranks.split(",")) if args.ranks else ()
    except ValueError:
        raise UsageError(f"--ranks: expected comma-separated integers, got {args.ranks!r}") from None
    methods = _parse_methods(args.methods)
    configs = {m: bench.config_for_method(
        m, shape_ratio=args.shape_ratio, rho0=args.rho0, mu=args.mu,
        xi=args.xi, max_iters=args.max_iters) for m in methods}
    if ranks:
        with _single_threaded_blas(args.deterministic):
            table = bench.runtime_bench(ranks, methods, args.trials, f_m=args.fm,
                                        m=args.m, n=args.n, seed=args.seed,
                                        configs=configs,
                                        threads=_resolve_threads(args))
        table.to_csv(args.out)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write("rank,method,mean_seconds,trials\n")
    _log(f"benchmarked ranks {list(ranks)}; wrote {args.out}")
    return EXIT_OK


def cmd_prox_curve(args) -> int:
    if args.step <= 0:
        raise UsageError("--step must be positive")
    if args.xmax <= args.xmin:
        raise UsageError("--xmax must exceed --xmin")
    kind = "soft" if args.method == "nnm" else args.method
    penalty = penalties.make_penalty(kind, args.lam, shape=args.shape)
    penalties.validate(penalty, strict=False)
    count = int(round((args.xmax - args.xmin) / args.step)) + 1
    xs = args.xmin + args.step * np.arange(count)
    loss = np.asarray(penalties.loss_eval(penalty, xs))
    prox = np.asarray(penalties.prox_eval(penalty, xs))
    reg = np.asarray(penalties.implicit_regularizer(penalty, xs))
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write("x,loss,prox,implicit_regularizer\n")
        for i in range(count):
            f.write(f"{float(xs[i])!r},{float(loss[i])!r},{float(prox[i])!r},"
                    f"{float(reg[i])!r}\n")
    _log(f"wrote {count} rows to {args.out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    prox = None
    if args.inject_prox_bias is not None:
        offset = args.inject_prox_bias

        def prox(p, x, _offset=offset):
            return np.asarray(penalties.prox_eval(p, x)) + _offset

    results = selftest.run_selftest(prox=prox)
    all_passed = all(r.passed for r in results)
    if args.json:
        report = {
            "suites": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                       for r in results],
            "all_passed": all_passed,
        }
        print(json.dumps(report, indent=2))
    for r in results:
        _log(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    _log("selftest " + ("passed" if all_passed else "FAILED"))
    return EXIT_OK if all_passed else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sirmc",
                     description="Low-rank matrix completion with sparsity-inducing "
                                 "regularizers generated from robust losses.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="complete a matrix from CSV files")
    p.add_argument("matrix", help="dense CSV; `nan` marks missing unless --mask is given")
    p.add_argument("--mask", default=None, help="observed-coordinate file (0-based i,j lines)")
    _add_solver_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("sweep", help="phase-transition sweep over (f_r, f_m)")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--fr-values", default=None, help="comma-separated rank fractions")
    p.add_argument("--fm-values", default=None, help="comma-separated missing fractions")
    p.add_argument("--methods", default=",".join(bench.METHODS))
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--m", type=int, default=300)
    p.add_argument("--n", type=int, default=200)
    _add_solver_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="runtime versus matrix rank")
    p.add_argument("--ranks", default="", help="comma-separated ranks")
    p.add_argument("--fm", type=float, default=0.1, help="missing fraction")
    p.add_argument("--methods", default=",".join(bench.METHODS))
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--m", type=int, default=300)
    p.add_argument("--n", type=int, default=200)
    _add_solver_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("prox-curve", help="tabulate loss, prox and regularizer curves")
    p.add_argument("--method", choices=("how", "hoc", "hog", "nnm"), default="how")
    p.add_argument("--lam", type=float, default=1.0, help="threshold")
    p.add_argument("--shape", type=float, default=None,
                   help="shape parameter value; default is the strict bound times lam")
    p.add_argument("--xmin", type=float, default=-3.0)
    p.add_argument("--xmax", type=float, default=3.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prox_curve)

    p = sub.add_parser("selftest", help="run the oracle/invariant suites")
    p.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    p.add_argument("--inject-prox-bias", type=float, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return EXIT_ERROR
    except SirmcError as exc:
        _log(f"error: {exc}")
        return EXIT_ERROR
    except OSError as exc:
        _log(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
