"""Command-line front end.

Subcommands::

    rscreg regress  --data F.csv --outcome y --covariates a,b --functional gini --method rsc
    rscreg mc       --model locscale --functional variance --n 500 --reps 200
    rscreg bench    --functional gini --sizes 500,1000,2000
    rscreg curve    --model locscale --n 1000 --functional der:0.5 --subsample 100

Every command writes its CSV output and a ``manifest.json`` into ``--out``.
Exit codes: 0 success, 2 invalid flags, 3 data errors, 4 numeric failures.
"""
import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError, NoAnalyticForm, NumericError, RscError, SpecMismatch
from .functionals import Functional
from .influence import Method, rsc_full
from .montecarlo import McConfig, ReplicationFailed, bench_timing, run_mc
from .regression import ModelSpec, rif_regress
from .sample import DgpKind, DgpModel, dgp_draw, load_csv
from .spline import fit_spline_rsc, interpolate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _functional(text):
    try:
        return Functional.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return parse


def _method(text):
    try:
        return Method(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown method {text!r} (rif, rsc, rsc-sp)")


def _methods(text):
    return [_method(t.strip()) for t in text.split(",") if t.strip()]


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--threads", type=_positive_int, default=1, help="maximum worker processes")
    common.add_argument("--normalize-mean", action="store_true",
                        help="divide the outcome by its mean before evaluating the statistic")
    common.add_argument("--strategy", choices=("auto", "exact", "incremental"), default="auto",
                        help="leave-one-out evaluation strategy")
    common.add_argument("--knots", type=int, default=5, help="spline knots K")
    common.add_argument("--quiet", action="store_true")

    p = argparse.ArgumentParser(prog="rscreg", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"rscreg {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("regress", parents=[common], help="RIF / RSC regression on a CSV file")
    r.add_argument("--data", required=True)
    r.add_argument("--outcome", required=True)
    r.add_argument("--covariates", type=_csv_list(str), required=True)
    r.add_argument("--functional", type=_functional, required=True)
    r.add_argument("--method", type=_method, default=Method.LOO_RSC)
    r.add_argument("--spec", choices=("linear", "quad", "quadratic", "cubic"), default="linear")
    r.add_argument("--subsample", type=_positive_int, default=None, help="spline subsample size n*")
    r.add_argument("--scale", type=float, default=1.0, help="multiply all estimates (e.g. 100)")

    m = sub.add_parser("mc", parents=[common], help="Monte Carlo bias / variance / MSE")
    m.add_argument("--model", choices=[k.value for k in DgpKind], required=True)
    m.add_argument("--functional", type=_functional, required=True)
    m.add_argument("--n", type=_positive_int, required=True)
    m.add_argument("--reps", type=int, default=200)
    m.add_argument("--methods", type=_methods, default=[Method.ANALYTIC_RIF, Method.LOO_RSC])
    m.add_argument("--spec", choices=("linear", "quad", "quadratic", "cubic"), default="linear")
    m.add_argument("--subsample", type=_positive_int, default=None)
    m.add_argument("--pop-n", type=_positive_int, default=10**6)
    m.add_argument("--epsilon", type=float, default=1e-4)
    m.add_argument("--population", type=float, default=None,
                   help="known population effect (skips the numerical derivative)")
    m.add_argument("--scale", type=float, default=1.0)

    b = sub.add_parser("bench", parents=[common], help="timing of RSC against RSC(sp)")
    b.add_argument("--functional", type=_functional, required=True)
    b.add_argument("--sizes", type=_csv_list(int), required=True)
    b.add_argument("--subsample-frac", type=float, default=0.1)
    b.add_argument("--subsample-rule", choices=("default", "fraction"), default="default",
                   help="default: fraction clipped to [200, 1000]; fraction: as given")
    b.add_argument("--reps", type=int, default=3)

    c = sub.add_parser("curve", parents=[common], help="exact and spline RSC for plotting")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--data")
    src.add_argument("--model", choices=[k.value for k in DgpKind])
    c.add_argument("--outcome", default=None, help="outcome column (with --data)")
    c.add_argument("--n", type=_positive_int, default=1000, help="sample size (with --model)")
    c.add_argument("--functional", type=_functional, required=True)
    c.add_argument("--subsample", type=_positive_int, default=None)
    return p


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _jsonable(v):
    if isinstance(v, Functional):
        return v.label
    if isinstance(v, Method):
        return v.value
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if x is None else repr(float(x)) if isinstance(x, (float, np.floating)) else x
                        for x in row])


def _print_table(header, rows, quiet):
    if quiet:
        return
    cells = [header] + [[f"{x:.6g}" if isinstance(x, (float, np.floating)) else str(x or "")
                         for x in row] for row in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    for row in cells:
        print("  ".join(s.rjust(w) for s, w in zip(row, widths)))


def _with_options(fn, args):
    if args.normalize_mean:
        fn = dataclasses.replace(fn, normalize_mean=True)
    return fn


def _require_analytic(fn, methods):
    if Method.ANALYTIC_RIF in methods and not fn.has_analytic_if:
        raise NoAnalyticForm(fn.label)


def cmd_regress(args, out):
    fn = _with_options(args.functional, args)
    _require_analytic(fn, [args.method])
    data = load_csv(args.data, args.outcome, args.covariates)
    if args.subsample is not None and args.subsample > data.n:
        raise ValueError(f"--subsample {args.subsample} exceeds n = {data.n}")
    rep = rif_regress(data, fn, args.method, ModelSpec(args.spec), n_star=args.subsample,
                      K=args.knots, seed=args.seed, strategy=args.strategy)
    rep = rep.scaled(args.scale)
    rows = []
    for t, term in enumerate(rep.terms):
        ape = se_ape = None
        if term in rep.covariate_names:
            ape, se_ape = rep.effect(term)
        rows.append([term, float(rep.coefficients[t]), float(rep.se[t]), ape, se_ape])
    header = ["term", "coef", "se", "ape", "ape_se"]
    _write_csv(out / "effects.csv", header, rows)
    _print_table(header, rows, args.quiet)
    return {"input_sha256": _sha256(args.data), "n_used": rep.n_used, "dropped": data.dropped}


def cmd_mc(args, out):
    if args.reps < 2:
        raise ValueError("--reps must be >= 2 (variance across replications)")
    fn = _with_options(args.functional, args)
    _require_analytic(fn, args.methods)
    cfg = McConfig(args.model, fn, args.n, reps=args.reps, methods=tuple(args.methods),
                   spec=ModelSpec(args.spec), n_star=args.subsample, K=args.knots,
                   base_seed=args.seed, epsilon=args.epsilon, pop_n=args.pop_n,
                   population=args.population, strategy=args.strategy, n_jobs=args.threads)
    report = run_mc(cfg)
    header = ["stat"] + [m.value for m in cfg.methods]
    rows = report.table(args.scale)
    _write_csv(out / "mc_report.csv", header, rows)
    _print_table(header, rows, args.quiet)
    return {"mc_se": {m.value: report[m].mc_se * abs(args.scale) for m in cfg.methods}}


def cmd_bench(args, out):
    if args.reps < 1:
        raise ValueError("--reps must be >= 1")
    if not args.sizes:
        raise ValueError("--sizes is empty")
    fn = _with_options(args.functional, args)
    strategy = "exact" if args.strategy == "auto" else args.strategy
    rows = bench_timing(fn, args.sizes, args.subsample_frac, args.reps, args.seed, args.knots,
                        strategy, args.subsample_rule)
    timing, plot = [], []
    for row in rows:
        for method, secs in ((Method.LOO_RSC, row.rsc_seconds), (Method.SPLINE_RSC, row.sp_seconds)):
            timing.append([row.size, method.value, row.n_star, secs, row.ratio])
            plot.append([row.size, method.value, secs])
    header = ["size", "method", "n_star", "seconds", "ratio"]
    _write_csv(out / "timing.csv", header, timing)
    _write_csv(out / "timing_plotdata.csv", ["size", "method", "seconds"], plot)
    _print_table(header, timing, args.quiet)
    return {"strategy": strategy}


def cmd_curve(args, out):
    fn = _with_options(args.functional, args)
    extra = {}
    if args.data:
        if not args.outcome:
            raise ValueError("--outcome is required with --data")
        sample = load_csv(args.data, args.outcome, []).outcome
        extra["input_sha256"] = _sha256(args.data)
    else:
        sample = dgp_draw(DgpModel(args.model), args.n, args.seed).outcome
    if args.subsample is not None and args.subsample > sample.n:
        raise ValueError(f"--subsample {args.subsample} exceeds n = {sample.n}")
    exact = rsc_full(fn, sample, args.strategy)
    model = fit_spline_rsc(fn, sample, args.subsample, args.knots, args.seed, args.strategy)
    spline = interpolate(model, sample)
    order = sample.sort_index
    rows = zip(sample.values[order].tolist(), exact.values[order].tolist(), spline.values[order].tolist())
    _write_csv(out / "curve_plotdata.csv", ["y", "rsc_exact", "rsc_spline"], rows)
    if not args.quiet:
        print(f"{sample.n} rows, n* = {model.subsample_indices.size}, spline R^2 = {model.fit_r2:.6f}")
    return {**extra, "n_star": int(model.subsample_indices.size), "fit_r2": model.fit_r2}


COMMANDS = {"regress": cmd_regress, "mc": cmd_mc, "bench": cmd_bench, "curve": cmd_curve}


def _exit_code(exc):
    if isinstance(exc, ReplicationFailed) and exc.__cause__ is not None:
        exc = exc.__cause__
    if isinstance(exc, (DataError, FileNotFoundError)):
        return EXIT_DATA
    if isinstance(exc, (NumericError, SpecMismatch, RscError, FloatingPointError)):
        return EXIT_NUMERIC
    return EXIT_USAGE


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        info = COMMANDS[args.command](args, out)
    except (RscError, FileNotFoundError, FloatingPointError, ValueError) as exc:
        code = _exit_code(exc)
        print(f"rscreg {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    flags = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k != "command"}
    manifest = {
        "command": args.command,
        "flags": flags,
        "seeds": {"base_seed": args.seed},
        "version": __version__,
        "numpy_version": np.__version__,
        "wall_seconds": round(time.perf_counter() - t0, 3),
        "input_sha256": None,
        "argv": list(sys.argv[1:] if argv is None else argv),
    }
    manifest.update(info)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
