"""``extdep`` command line: coef | simulate | estimate | validate | curve.

Exit codes: 0 ok, 1 validation failure, 2 configuration error, 3 model
invariant violation, 4 non-simulable family, 5 data validation failure,
6 lambda grid too large.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import coefficient_report, epsilon, epsilon_bounds, madogram_nu
from .errors import (
    ConfigError,
    DataError,
    ExtdepError,
    GridTooLargeError,
    ModelError,
    NotSimulableError,
    UnknownComponentError,
)
from .estimation import (
    Dataset,
    estimate_block_epsilon_np,
    estimate_chi_np,
    estimate_epsilon_ml,
    estimate_epsilon_np,
    estimate_kappa_hill,
    estimate_nu_np,
    fit_frechet_margin,
    kappa_stability_curve,
)
from .families import InvertedMev
from .io import dumps, fmt_float, format_csv, load_model, model_to_dict, read_csv
from .model import Partition
from .simulation import resolve_threads, simulate
from .validate import format_table, run_validation

MAX_GRID = 10**6


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _lambda(text, p):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--lambda: cannot parse {text!r}") from exc
    if len(vals) == 1:
        vals = vals * p
    if len(vals) != p:
        raise ConfigError(f"--lambda needs {p} values (one per block), got {len(vals)}")
    if any(not (v > 0 and np.isfinite(v)) for v in vals):
        raise ConfigError("--lambda values must be strictly positive")
    return vals


def _partition(text, d, fallback=None):
    if text is None:
        return fallback or Partition.singletons(d)
    try:
        return Partition.parse(text, d)
    except ModelError as exc:
        raise ConfigError(f"--partition: {exc}") from exc


def _model(args):
    if not args.model:
        raise ConfigError("--model PATH is required")
    model, part = load_model(args.model)
    return model, _partition(args.partition, model.d, part)


def cmd_coef(args):
    model, part = _model(args)
    rep = coefficient_report(model, part, _lambda(args.lam, part.p), allow_large=args.allow_large)
    _emit(dumps(rep.to_dict()), args.out)
    return 0


def _sidecar_path(out):
    out = Path(out)
    return out.with_suffix(".json") if out.suffix == ".csv" else Path(str(out) + ".json")


def cmd_simulate(args):
    try:
        model, part = _model(args)
    except UnknownComponentError as exc:
        raise NotSimulableError(str(exc)) from exc
    if args.n is None or args.n < 1:
        raise ConfigError("--n must be a positive integer")
    batch = simulate(model, args.n, args.seed, args.threads)
    _emit(format_csv(batch.values), args.out)
    if args.out:
        meta = {
            "spec_version": 1,
            "model": model_to_dict(model),
            "seed": args.seed,
            "n": args.n,
            "scale": batch.scale,
            "fingerprint": batch.fingerprint,
        }
        _sidecar_path(args.out).write_text(dumps(meta))
    return 0


def _load_data(args):
    if not args.data:
        raise ConfigError("--data PATH is required")
    names, values = read_csv(args.data)
    return Dataset(values, tuple(names), "uniform" if args.uniform_scale else "raw")


def _result_block(res, **extra):
    out = dict(extra)
    out.update(res.to_dict())
    return out


def cmd_estimate(args):
    data = _load_data(args)
    part = _partition(args.partition, data.d)
    common = {"reps": args.reps, "seed": args.seed, "threads": resolve_threads(args.threads)}
    doc = {"method": args.method, "n": data.n, "d": data.d, "partition": part.to_lists()}
    if args.method == "np":
        lam = _lambda(args.lam, part.p)
        doc["lambda"] = lam or [1.0] * part.p
        doc["epsilon_joint"] = estimate_epsilon_np(data, part, lam, **common).to_dict()
        doc["epsilon_blocks"] = [
            _result_block(estimate_block_epsilon_np(data, part, j, 1.0, **common), block=j + 1) for j in range(part.p)
        ]
        doc["chi_pairs"] = [
            _result_block(estimate_chi_np(data, part, j, k, **common), blocks=[j + 1, k + 1])
            for j in range(part.p)
            for k in range(j + 1, part.p)
        ]
        doc["nu"] = estimate_nu_np(data, part, lam, **common).to_dict()
    elif args.method == "ml":
        if data.scale != "raw":
            raise DataError("ML estimation needs positive raw-scale data (drop --uniform-scale)")
        fit = fit_frechet_margin(data.values, shared_eta=True)
        doc["margins"] = fit.to_dict()
        doc["epsilon_joint"] = estimate_epsilon_ml(data, part, None, fit, **common).to_dict()
        doc["epsilon_blocks"] = [
            _result_block(estimate_epsilon_ml(data, part, j, fit, **common), block=j + 1) for j in range(part.p)
        ]
        doc["epsilon_pairs"] = [
            _result_block(estimate_epsilon_ml(data, part, (j, k), fit, **common), blocks=[j + 1, k + 1])
            for j in range(part.p)
            for k in range(j + 1, part.p)
        ]
    else:
        if part.p < 2:
            raise ConfigError("hill method needs at least two blocks")
        curve_path = Path(args.kcurve) if args.kcurve else (
            Path(args.out).with_name(Path(args.out).stem + "_kcurve.csv") if args.out else Path("kcurve.csv")
        )
        pairs, rows = [], []
        for j in range(part.p):
            for k in range(j + 1, part.p):
                res = estimate_kappa_hill(data, part, j, k, args.k, **common)
                pairs.append(_result_block(res, blocks=[j + 1, k + 1]))
                ks, kap = kappa_stability_curve(data, part, j, k)
                rows.extend((j + 1, k + 1, int(kk), float(v)) for kk, v in zip(ks, kap))
        doc["kappa_pairs"] = pairs
        doc["kcurve"] = str(curve_path)
        lines = ["block_j,block_k,k,kappa"] + [f"{a},{b},{kk},{fmt_float(v)}" for a, b, kk, v in rows]
        curve_path.write_text("\n".join(lines) + "\n")
    _emit(dumps(doc), args.out)
    return 0


def cmd_validate(args):
    model, part = _model(args)
    lam = None if isinstance(model, InvertedMev) else _lambda(args.lam, part.p)
    checks = run_validation(model, part, lam, n=args.n or 200_000, seed=args.seed, tol_se=args.tol_se,
                            threads=args.threads, k=args.k)
    sys.stdout.write(format_table(checks))
    if args.out:
        Path(args.out).write_text(dumps([c.to_dict() for c in checks]))
    return 0 if all(c.passed for c in checks) else 1


def _axis(text):
    text = text.strip()
    try:
        if ":" in text:
            a, b, m = text.split(":")
            return list(np.linspace(float(a), float(b), int(m)))
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--grid: cannot parse {text!r}") from exc


def cmd_curve(args):
    model, part = _model(args)
    if isinstance(model, InvertedMev):
        model = model.generator
    if not args.grid:
        raise ConfigError("--grid is required, e.g. '0.5,1,2|1' or '0.2:5:50|1'")
    axes = [_axis(a) for a in args.grid.split("|")]
    if len(axes) != part.p:
        raise ConfigError(f"--grid needs {part.p} '|'-separated axes, got {len(axes)}")
    size = int(np.prod([len(a) for a in axes], dtype=float))
    if size > MAX_GRID:
        raise GridTooLargeError(f"lambda grid has {size} points (limit {MAX_GRID})")
    if any(v <= 0 for a in axes for v in a):
        raise ConfigError("--grid values must be strictly positive")
    header = [f"lambda{j + 1}" for j in range(part.p)] + ["epsilon", "nu", "lower", "upper"]
    lines = [",".join(header)]
    for lam in itertools.product(*axes):
        lo, hi = epsilon_bounds(model, part, lam)
        vals = list(lam) + [epsilon(model, part, lam), madogram_nu(model, part, lam), lo, hi]
        lines.append(",".join(fmt_float(v) for v in vals))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="extdep", description="Multidimensional extremal dependence coefficients")
    parser.add_argument("--version", action="version", version=f"extdep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", metavar="PATH", help="model JSON document")
        p.add_argument("--partition", metavar="SPEC", help='1-based blocks, e.g. "1,2|3,4"')
        p.add_argument("--lambda", dest="lam", metavar="CSV", help="lambda per block, e.g. 1,2")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None, help="worker threads (default $EXTDEP_THREADS or 1)")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("coef", help="exact coefficient report")
    common(p)
    p.add_argument("--allow-large", action="store_true", help="allow more than 32 blocks")
    p.set_defaults(func=cmd_coef)

    p = sub.add_parser("simulate", help="exact simulation to CSV")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate coefficients from data")
    common(p, model=False)
    p.add_argument("--data", metavar="PATH", help="headed CSV of observations")
    p.add_argument("--method", choices=("np", "ml", "hill"), default="np")
    p.add_argument("--reps", type=int, default=200, help="bootstrap replicates (0 disables)")
    p.add_argument("--k", type=int, default=None, help="Hill top-order count (default ceil(2 sqrt n))")
    p.add_argument("--uniform-scale", action="store_true", help="data already lie in (0, 1)")
    p.add_argument("--kcurve", metavar="PATH", help="where to write the Hill k-stability curve")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("validate", help="Monte Carlo check of every closed form")
    common(p)
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tol-se", type=float, default=3.0, help="tolerance in Monte Carlo standard errors")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curve", help="epsilon, nu and bounds over a lambda grid")
    common(p)
    p.add_argument("--grid", metavar="SPEC", help='per-block axes: "0.5,1,2|1" or "0.2:5:50|1"')
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "reps", 0) and 0 < args.reps < 100:
        parser.error("--reps must be 0 or at least 100")
    try:
        return args.func(args)
    except ExtdepError as exc:
        print(f"extdep {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
