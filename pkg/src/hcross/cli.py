"""Command-line entry point ``hcross``."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels, lab, spectral
from .freq_index import cross_indices, layer_indices
from .mterm import greedy_mterm, layered_mterm, plan_budget_H, plan_budget_W
from .smolyak import PolynomialSampler, smolyak_recover


def _open_out(path):
    return open(path, "w", newline="") if path and path != "-" else sys.stdout


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, _, value = item.partition("=")
        out[key.strip()] = lab._parse_value(value)
    return out


def cmd_cross(args) -> int:
    freqs = layer_indices(args.level, args.dim) if args.layer else cross_indices(args.level, args.dim)
    fh = _open_out(args.out)
    try:
        for k in freqs:
            fh.write(",".join(str(int(v)) for v in k) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_kernel(args) -> int:
    fh = _open_out(args.out)
    writer = csv.writer(fh, lineterminator="\n")
    try:
        if args.type == "bernoulli":
            d = len(args.alpha)
            poly = kernels.bernoulli_poly(kernels.BernoulliSpec(args.r, tuple(args.alpha), args.K))
            if args.points:
                values = spectral.synthesize(poly, (args.points,) * d).values.real.ravel()
                mesh = np.meshgrid(*[2 * np.pi * np.arange(args.points) / args.points] * d, indexing="ij")
                pts = np.stack([g.ravel() for g in mesh], axis=1)
                for x, v in zip(pts, values):
                    writer.writerow([repr(float(t)) for t in x] + [repr(float(v))])
            else:
                for k, c in zip(poly.freqs, poly.coeffs):
                    writer.writerow([int(v) for v in k] + [repr(float(c.real)), repr(float(c.imag))])
            return 0
        if args.type == "dirichlet":
            table = kernels.dirichlet_multiplier(args.order)
            pointwise = lambda t: kernels.dirichlet_eval(args.order, t[:, 0])
        elif args.type == "vp":
            table = kernels.vp_multiplier(args.order)
            pointwise = lambda t: kernels.vp_eval(args.order, t[:, 0])
        else:
            table = kernels.block_multiplier(args.scale)
            pointwise = lambda t: kernels.block_eval(args.scale, t)
        if args.points:
            d = table.dim
            mesh = np.meshgrid(*[2 * np.pi * np.arange(args.points) / args.points] * d, indexing="ij")
            pts = np.stack([g.ravel() for g in mesh], axis=1)
            for x, v in zip(pts, np.atleast_1d(pointwise(pts))):
                writer.writerow([repr(float(t)) for t in x] + [repr(float(v))])
        else:
            for k, w in zip(table.freqs, table.weights):
                writer.writerow([int(v) for v in k] + [repr(float(w)), "0.0"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_project(args) -> int:
    poly = lab.read_coefficients(args.inp, d=args.dim)
    op = spectral.project_cross if args.kind == "sharp" else spectral.vp_cross
    lab.write_coefficients(op(poly, args.level), args.out)
    return 0


def cmd_mterm(args) -> int:
    params = _params(args.param)
    params.setdefault("seed", args.seed)
    if args.fn.startswith("random_"):
        params.setdefault("r", args.r)
        params.setdefault("p", args.p)
    f = lab.registry_function(args.fn, params, args.dim)
    if args.method == "greedy":
        res = greedy_mterm(f, args.m, oversample=args.oversample)
        method = "greedy"
    else:
        planner, kind = (plan_budget_W, "sharp") if args.cls == "W" else (plan_budget_H, "vp")
        plan = planner(args.m, args.r, args.p, args.dim, args.kappa, args.zeta)
        res = layered_mterm(f, plan, kind=kind, oversample=args.oversample)
        method = f"layered_{args.cls}"
    row = {
        "method": method, "d": args.dim, "class": args.cls, "r": args.r, "p": args.p,
        "m": args.m, "error_linf": res.error_linf, "error_l2": res.error_l2,
        "units_used": res.terms_used, "seconds": None,
    }
    preamble = f"# {lab.REPORT_VERSION}; function={args.fn}; oversample={args.oversample:g}; upper bounds"
    if args.out:
        lab.write_report([row], args.out, preamble)
    else:
        print(",".join(lab.CSV_HEADER))
        print(",".join(lab.format_row(row)))
    return 0


def cmd_smolyak(args) -> int:
    params = _params(args.param)
    params.setdefault("seed", args.seed)
    f = lab.registry_function(args.fn, params, args.dim)
    rows = []
    for n in range(args.level + 1):
        sampler = PolynomialSampler(f)
        approx = smolyak_recover(sampler, n, args.dim)
        diff = f - approx
        rows.append({
            "method": "smolyak", "d": args.dim, "class": args.cls, "r": args.r, "p": args.p,
            "m": sampler.call_count,
            "error_linf": spectral.norm_lp_poly(diff, math.inf, oversample=args.oversample),
            "error_l2": diff.l2_norm(), "units_used": sampler.call_count, "seconds": None,
        })
    preamble = f"# {lab.REPORT_VERSION}; function={args.fn}; oversample={args.oversample:g}"
    lab.write_report(rows, args.out, preamble)
    return 0


def cmd_bench(args) -> int:
    cfg = lab.load_config(args.config)
    if args.out:
        cfg.output = args.out
    rows = lab.run_experiment(cfg)
    if not cfg.output:
        print(",".join(lab.CSV_HEADER))
        for row in rows:
            print(",".join(lab.format_row(row)))
    return 0


def cmd_fit(args) -> int:
    rows = lab.read_report(args.inp)
    methods = sorted({row["method"] for row in rows})
    for method in methods:
        sub = [row for row in rows if row["method"] == method]
        fit = lab.fit_rate(sub, with_loglog=args.loglog, column=args.column)
        extra = f" loglog_power={fit.loglog_power:.6f}" if fit.loglog_power is not None else ""
        print(
            f"{method} {args.column}: main_rate={fit.main_rate:.6f} log_power={fit.log_power:.6f}"
            f"{extra} residual={fit.residual:.3e} window={fit.window[0]}..{fit.window[1]}"
        )
    return 0


def cmd_compare(args) -> int:
    reports = [(Path(p).name, lab.read_report(p)) for p in args.inp]
    text = lab.compare_reports(reports)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _inf_float(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcross", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cross", help="enumerate a step hyperbolic cross or one of its layers")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--layer", action="store_true", help="only frequencies of level exactly n")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("kernel", help="kernel samples or multiplier tables as CSV")
    p.add_argument("--type", choices=["dirichlet", "vp", "block", "bernoulli"], required=True)
    p.add_argument("--order", type=int, default=1, help="k for dirichlet, m for vp")
    p.add_argument("--scale", type=lambda t: tuple(int(v) for v in t.split(",")), default=(0,),
                   help="comma-separated block index for --type block")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--alpha", type=lambda t: [float(v) for v in t.split(",")], default=[0.0])
    p.add_argument("--K", type=int, default=64)
    p.add_argument("--points", type=int, default=0, help="grid points per axis; 0 emits the table")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("project", help="apply S_{Q_n} or A_{Q_n} to a coefficient file")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--kind", choices=["sharp", "vp"], default="sharp")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=None)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("mterm", help="one m-term approximation of a registry function")
    p.add_argument("--class", dest="cls", choices=["W", "H"], default="H")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--p", type=_inf_float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--method", choices=["greedy", "layered"], default="layered")
    p.add_argument("--fn", required=True)
    p.add_argument("--param", action="append", help="function parameter key=value (repeatable)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oversample", type=float, default=spectral.DEFAULT_OVERSAMPLE)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mterm)

    p = sub.add_parser("smolyak", help="sparse-grid recovery errors for levels 0..n")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--param", action="append")
    p.add_argument("--class", dest="cls", default="H")
    p.add_argument("--r", type=float, default=0.4)
    p.add_argument("--p", type=_inf_float, default=math.inf)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oversample", type=float, default=spectral.DEFAULT_OVERSAMPLE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smolyak)

    p = sub.add_parser("bench", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override the config's output path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="fit decay exponents to a report")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--loglog", action="store_true")
    p.add_argument("--column", choices=["error_linf", "error_l2"], default="error_linf")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="markdown table comparing reports")
    p.add_argument("--in", dest="inp", action="append", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
