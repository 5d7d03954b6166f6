"""Command-line entry point: ``crossprob {poisson,ecdf,pvalue,critical-value,bench}``.

Exit status 0 on success, 2 on malformed input or usage, 3 on numerical
failure. Probabilities are printed with ``repr`` so they round-trip.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import bench
from .boundaries import BoundaryPair, compile_schedule
from .engine import (
    log_ecdf_noncrossing,
    log_poisson_noncrossing_conditional,
    log_poisson_noncrossing_unconditional,
)
from .gof import STATISTICS, StatisticSpec, compute_statistic, critical_value, pvalue
from .oracles import ecdf_noncrossing_binomial_recursion, monte_carlo_ecdf, monte_carlo_poisson

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
METHODS = ("fft", "direct", "binomial-oracle", "monte-carlo")
DEFAULT_TRIALS = 100_000


class InputError(ValueError):
    pass


def _log(p):
    return math.log(p) if p > 0 else -math.inf


def _num(x):
    # json has no inf; log(0) is written as the string "-inf"
    return x if math.isfinite(x) else repr(float(x))


def _emit(args, fields, text_keys):
    if args.json:
        print(json.dumps({k: _num(v) if isinstance(v, float) else v for k, v in fields.items()}))
        return
    for key in text_keys:
        v = fields[key]
        print(f"{key}: {v!r}" if isinstance(v, float) else f"{key}: {v}")


def _check_method_options(args):
    mc = args.method == "monte-carlo"
    if not mc and (args.trials is not None or args.seed is not None):
        raise InputError("--trials and --seed are only valid with --method monte-carlo")
    if mc:
        if args.seed is None:
            raise InputError("--method monte-carlo requires --seed")
        if args.force_full_fft:
            raise InputError("--force-full-fft does not apply to monte-carlo")
        if args.trials is not None and args.trials < 1:
            raise InputError("--trials must be positive")
    if args.method == "binomial-oracle" and args.force_full_fft:
        raise InputError("--force-full-fft does not apply to binomial-oracle")


def _engine_kw(args):
    return {"full": True} if args.force_full_fft else {}


def _load_boundary(args):
    try:
        bp = BoundaryPair.load(args.boundary)
    except OSError as exc:
        raise InputError(f"cannot read {args.boundary}: {exc.strerror}") from None
    if args.n is not None:
        bp = bp.with_n(args.n)
    return bp


def cmd_poisson(args):
    _check_method_options(args)
    bp = _load_boundary(args)
    k = args.given_count
    if k is not None and k < 0:
        raise InputError("--given-count must be non-negative")
    start = time.perf_counter()
    extra = {}
    if args.method == "binomial-oracle":
        if k is None or k != bp.n:
            raise InputError("binomial-oracle only evaluates the conditional law with --given-count n")
        log_p = _log(ecdf_noncrossing_binomial_recursion(bp))
    elif args.method == "monte-carlo":
        res = monte_carlo_poisson(bp, args.trials or DEFAULT_TRIALS, args.seed, given_count=k)
        log_p = _log(res.estimate)
        extra = {"std_error": res.std_error, "trials": res.trials, "seed": res.seed}
    elif k is None:
        log_p = log_poisson_noncrossing_unconditional(bp, args.method, **_engine_kw(args))
    else:
        log_p = log_poisson_noncrossing_conditional(bp, k, args.method, **_engine_kw(args))
    elapsed = (time.perf_counter() - start) * 1e3
    fields = {
        "probability": math.exp(log_p),
        "log_probability": log_p,
        "n": bp.n,
        "given_count": k,
        "checkpoints": len(compile_schedule(bp)),
        "method": args.method,
        "wall_time_ms": elapsed,
        **extra,
    }
    _emit(args, fields, ["probability", "log_probability", *extra])
    return EXIT_OK


def cmd_ecdf(args):
    _check_method_options(args)
    bp = _load_boundary(args)
    start = time.perf_counter()
    extra = {}
    if args.method == "binomial-oracle":
        log_p = _log(ecdf_noncrossing_binomial_recursion(bp))
    elif args.method == "monte-carlo":
        res = monte_carlo_ecdf(bp, args.trials or DEFAULT_TRIALS, args.seed)
        log_p = _log(res.estimate)
        extra = {"std_error": res.std_error, "trials": res.trials, "seed": res.seed}
    else:
        log_p = log_ecdf_noncrossing(bp, args.method, **_engine_kw(args))
    elapsed = (time.perf_counter() - start) * 1e3
    fields = {
        "probability": math.exp(log_p),
        "log_probability": log_p,
        "n": bp.n,
        "checkpoints": len(compile_schedule(bp, cap=bp.n)),
        "method": args.method,
        "wall_time_ms": elapsed,
        **extra,
    }
    _emit(args, fields, ["probability", "log_probability", *extra])
    return EXIT_OK


def _read_samples(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        u = np.array([float(tok) for tok in text.split()])
    except ValueError as exc:
        raise InputError(f"malformed samples file: {exc}") from None
    if u.size == 0:
        raise InputError("samples file is empty")
    if np.any(np.isnan(u)) or np.any((u < 0) | (u > 1)):
        raise InputError("samples must be numbers in [0, 1]")
    return np.sort(u)


def _engine_method(args):
    if args.method == "monte-carlo":
        raise InputError("monte-carlo is not available for p-values")
    return args.method


def cmd_pvalue(args):
    method = _engine_method(args)
    _check_method_options(args)
    if (args.samples is None) == (args.stat_value is None):
        raise InputError("give exactly one of --samples or --stat-value")
    if args.samples is not None:
        u = _read_samples(args.samples)
        if args.n is not None and args.n != u.size:
            raise InputError(f"--n {args.n} does not match {u.size} samples")
        spec = StatisticSpec(args.stat, u.size)
        t = compute_statistic(spec, u)
    else:
        if args.n is None:
            raise InputError("--stat-value needs --n")
        spec = StatisticSpec(args.stat, args.n)
        t = args.stat_value
    start = time.perf_counter()
    rep = pvalue(spec, t, method, **_engine_kw(args))
    elapsed = (time.perf_counter() - start) * 1e3
    fields = {
        "statistic": spec.name,
        "statistic_value": float(t),
        "p_value": rep.p_value,
        "log_p_value": _log(rep.p_value),
        "n": spec.n,
        "checkpoints": rep.checkpoints,
        "method": method,
        "wall_time_ms": elapsed,
    }
    _emit(args, fields, ["statistic_value", "p_value", "log_p_value"])
    return EXIT_OK


def cmd_critical_value(args):
    method = _engine_method(args)
    _check_method_options(args)
    if args.n is None:
        raise InputError("critical-value needs --n")
    spec = StatisticSpec(args.stat, args.n)
    start = time.perf_counter()
    t = critical_value(spec, args.alpha, rtol=args.rtol, method=method, **_engine_kw(args))
    elapsed = (time.perf_counter() - start) * 1e3
    fields = {
        "statistic": spec.name,
        "alpha": args.alpha,
        "critical_value": t,
        "n": spec.n,
        "method": method,
        "wall_time_ms": elapsed,
    }
    _emit(args, fields, ["critical_value"])
    return EXIT_OK


def cmd_bench(args):
    methods = tuple(args.method or ("fft", "direct"))
    for m in methods:
        if m not in ("fft", "direct"):
            raise InputError(f"bench times the fft and direct methods, not {m!r}")
    if len(set(methods)) != len(methods):
        raise InputError("duplicate --method")
    if not args.n_list or any(n < 1 for n in args.n_list):
        raise InputError("--n-list needs positive sample sizes")
    rows, fits = bench.run_bench(
        args.n_list,
        methods=methods,
        statistic=args.stat,
        alpha=args.alpha,
        repeats=args.repeats,
        full=args.force_full_fft,
    )
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        bench.write_csv(rows, out)
    finally:
        if args.output:
            out.close()
    for method, fit in fits.items():
        if fit is None:
            print(f"{method}: too few distinct n for a slope fit", file=sys.stderr)
        else:
            print(f"{method}: slope {fit.slope:.4f} r_squared {fit.r_squared:.4f}", file=sys.stderr)
    return EXIT_OK


def _probability(x):
    x = float(x)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return x


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crossprob",
        description="Exact boundary non-crossing probabilities for Poisson processes and uniform ECDFs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, methods=METHODS):
        p.add_argument("--method", choices=methods, default="fft")
        p.add_argument("--n", type=int, help="sample size / Poisson intensity")
        p.add_argument("--trials", type=int, help="Monte Carlo trials (default %d)" % DEFAULT_TRIALS)
        p.add_argument("--seed", type=int, help="Monte Carlo seed (required for monte-carlo)")
        p.add_argument("--json", action="store_true", help="print one JSON object")
        p.add_argument("--force-full-fft", action="store_true",
                       help="convolve full-length arrays at every step instead of the active band")

    p = sub.add_parser("poisson", help="Poisson process non-crossing probability")
    p.add_argument("boundary", help="boundary file")
    p.add_argument("--given-count", type=int, help="condition on this many arrivals by time 1")
    common(p)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("ecdf", help="uniform ECDF non-crossing probability")
    p.add_argument("boundary", help="boundary file")
    common(p)
    p.set_defaults(func=cmd_ecdf)

    p = sub.add_parser("pvalue", help="exact p-value of a goodness-of-fit statistic")
    p.add_argument("--stat", choices=STATISTICS, required=True)
    p.add_argument("--samples", help="file of probability-transformed samples")
    p.add_argument("--stat-value", type=float, help="observed statistic value")
    common(p, ("fft", "direct", "binomial-oracle"))
    p.set_defaults(func=cmd_pvalue)

    p = sub.add_parser("critical-value", help="threshold whose exact p-value is alpha")
    p.add_argument("--stat", choices=STATISTICS, required=True)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--rtol", type=float, default=1e-10, help="relative tolerance on the threshold")
    common(p, ("fft", "direct", "binomial-oracle"))
    p.set_defaults(func=cmd_critical_value)

    p = sub.add_parser("bench", help="time fft and direct methods on calibrated boundaries (CSV)")
    p.add_argument("--n-list", type=int, nargs="+", required=True)
    p.add_argument("--stat", choices=STATISTICS, default="ks_two_sided")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--method", choices=("fft", "direct"), action="append",
                   help="repeat to time several methods (default: both)")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--force-full-fft", action="store_true")
    p.add_argument("--output", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArithmeticError as exc:
        print(f"crossprob: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"crossprob: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
