"""Command-line front end.

Subcommands: gen, estimate, derivative-check, schedule, compare-partitions.
Each analysis command writes a CSV table to --out, a JSON summary next to it
(same stem, .json), and a rendered figure (same stem, .png) unless --no-plot
is given.  Outputs are byte-stable for a fixed configuration and version.

Exit codes: 0 success, 2 validation error (bad flags, malformed files),
3 numeric failure (scale underflow, degenerate series).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import plots
from .dimension import estimate_orders, sample_series, series_to_rows
from .errors import DegenerateSeriesError, FiltdimError
from .filterops import DEFAULT_QUAD, QuadratureSpec, check_slope_bounds, lq_norm, norm_derivative
from .kernels import parse_kernel
from .measures import (
    DiscreteMeasure,
    from_pgm_image,
    load_json,
    make_cantor,
    make_random,
    make_uniform_grid,
    nearest_neighbor_distance,
    normalized,
    point_mass,
    save_json,
    two_point,
)
from .partitions import KIND_NAMES, evaluate, make_kind
from .schedule import geometric_schedule, power_schedule, report_to_rows, run_schedule

_SCALE_RANGE = re.compile(
    r"^\s*(\d+(?:\.\d+)?)\^(-?\d+)\.\.(?:(\d+(?:\.\d+)?)\^)?(-?\d+)\s*$")
_SCHEDULE_POW = re.compile(r"^pow:t=([0-9.]+),n=(\d+)\.\.(\d+)$")
_SCHEDULE_GEOM = re.compile(r"^geom:n=(\d+)\.\.(\d+)$")


def _parse_kv(text: str, what: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ValueError(f"bad {what} parameter {item!r} (expected key=value)")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _take(params: dict, what: str, key: str, cast, default=None):
    if key in params:
        return cast(params.pop(key))
    if default is None:
        raise ValueError(f"{what} spec needs {key}=...")
    return default


def _no_leftovers(params: dict, what: str) -> None:
    if params:
        raise ValueError(f"unknown {what} parameter(s): {', '.join(sorted(params))}")


def parse_measure_spec(spec: str, seed: int = 0) -> tuple[DiscreteMeasure, str]:
    """Measure from a generator spec or a .json/.pgm path; returns (measure, label)."""
    if spec.endswith(".json"):
        return load_json(spec), spec
    if spec.endswith(".pgm"):
        return from_pgm_image(spec), spec
    name, _, rest = spec.partition(":")
    params = _parse_kv(rest, name)
    if name == "point":
        dim = _take(params, name, "dim", int, 1)
        _no_leftovers(params, name)
        return point_mass(dim=dim), spec
    if name == "two-point":
        sep = _take(params, name, "sep", float, 1.0)
        dim = _take(params, name, "dim", int, 1)
        _no_leftovers(params, name)
        return two_point(sep=sep, dim=dim), spec
    if name == "cantor":
        depth = _take(params, name, "depth", int)
        ratio = _take(params, name, "ratio", float, 1.0 / 3.0)
        p = _take(params, name, "p", float, 0.5)
        _no_leftovers(params, name)
        return make_cantor(depth, ratio=ratio, p=p), spec
    if name == "uniform":
        dim = _take(params, name, "dim", int, 1)
        n = _take(params, name, "n", int)
        _no_leftovers(params, name)
        return make_uniform_grid(dim, n), spec
    if name == "random":
        dim = _take(params, name, "dim", int, 1)
        n = _take(params, name, "n", int)
        rng_seed = _take(params, name, "seed", int, seed)
        _no_leftovers(params, name)
        return make_random(dim, n, seed=rng_seed), spec
    raise ValueError(
        f"unknown measure spec {spec!r} (expected point|two-point|cantor|uniform|random"
        f" generator, or a .json/.pgm path)")


def parse_scales(text: str) -> np.ndarray:
    """Scale list: ``BASE^A..BASE^B`` expanded inclusively, or comma floats."""
    m = _SCALE_RANGE.match(text)
    if m:
        base = float(m.group(1))
        if m.group(3) is not None and float(m.group(3)) != base:
            raise ValueError(f"scale range {text!r} mixes bases")
        a, b = int(m.group(2)), int(m.group(4))
        step = 1 if b >= a else -1
        exponents = range(a, b + step, step)
        eps = np.array([base ** k for k in exponents])
    else:
        try:
            eps = np.array([float(v) for v in text.split(",")])
        except ValueError:
            raise ValueError(f"cannot parse scales {text!r}") from None
    if eps.size == 0 or np.any(eps <= 0.0) or np.any(np.diff(eps) >= 0.0):
        raise ValueError(f"scales {text!r} must expand to a strictly decreasing positive list")
    return eps


def parse_schedule_spec(text: str):
    m = _SCHEDULE_POW.match(text)
    if m:
        return power_schedule(float(m.group(1)), int(m.group(2)), int(m.group(3)))
    m = _SCHEDULE_GEOM.match(text)
    if m:
        return geometric_schedule(int(m.group(1)), int(m.group(2)))
    raise ValueError(f"bad schedule {text!r} (expected pow:t=T,n=A..B or geom:n=A..B)")


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _write_csv(path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[col]) for col in header])


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _summary_schema() -> dict:
    text = resources.files("filtdim.schemas").joinpath("summary.schema.json").read_text()
    return json.loads(text)


def _write_summary(path, doc: dict) -> None:
    doc = _jsonable(doc)
    jsonschema.validate(doc, _summary_schema())
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _warn_scale_fidelity(mu: DiscreteMeasure, eps_min: float) -> None:
    if mu.n_atoms < 2 or mu.n_atoms > 100_000:
        return
    nn = nearest_neighbor_distance(mu)
    if nn > 0.0 and eps_min < 2.0 * nn:
        print(
            f"warning: smallest scale {eps_min:g} is below twice the nearest-neighbor "
            f"atom distance {nn:g}; the atomic approximant is not faithful there",
            file=sys.stderr,
        )


def _quad_from(args) -> QuadratureSpec:
    return QuadratureSpec(points_per_scale=args.quad_points, tail_tolerance=args.quad_tol)


def _load_measure(args) -> tuple[DiscreteMeasure, str]:
    mu, label = parse_measure_spec(args.measure, seed=args.seed)
    if args.normalize:
        mu = normalized(mu)
    return mu, label


def _out_paths(out: str) -> tuple[Path, Path, Path]:
    csv_path = Path(out)
    return csv_path, csv_path.with_suffix(".json"), csv_path.with_suffix(".png")


def cmd_gen(args) -> int:
    sources = {
        "cantor": args.cantor,
        "uniform": args.uniform,
        "point": args.point,
        "two-point": args.two_point,
        "random": args.random,
        "measure": args.measure,
    }
    given = [(k, v) for k, v in sources.items() if v is not None]
    if len(given) != 1:
        raise ValueError("gen needs exactly one measure source")
    name, value = given[0]
    spec = value if name == "measure" else (name if value == "" else f"{name}:{value}")
    mu, _ = parse_measure_spec(spec, seed=args.seed)
    if args.normalize:
        mu = normalized(mu)
    save_json(mu, args.out)
    print(f"wrote {mu.n_atoms} atoms (dim {mu.dim}) to {args.out}")
    return 0


def cmd_estimate(args) -> int:
    mu, label = _load_measure(args)
    kernel = parse_kernel(args.kernel)
    eps = parse_scales(args.scales)
    _warn_scale_fidelity(mu, float(eps[-1]))
    quad = _quad_from(args)
    kinds = args.kind or ["box"]
    rows, results = [], []
    series_by_kind, estimates = {}, {}
    for tag in kinds:
        series = sample_series(make_kind(tag, kernel), mu, args.q, eps, quad=quad)
        est = estimate_orders(series)
        series_by_kind[tag] = series
        estimates[tag] = est
        for row in series_to_rows(series):
            rows.append({"kind": tag, "q": args.q, **row})
        results.append({
            "kind": tag, "q": args.q, "slope": est.slope, "upper": est.upper,
            "lower": est.lower, "window": list(est.window), "residual": est.residual,
            "low_confidence": est.low_confidence, "n_dropped": est.n_dropped,
        })
        if est.low_confidence:
            print(f"warning: {tag} estimate spans less than one scale decade",
                  file=sys.stderr)
    csv_path, json_path, png_path = _out_paths(args.out)
    _write_csv(csv_path, ["kind", "q", "eps", "lambda", "lnP", "ratio"], rows)
    _write_summary(json_path, {
        "command": "estimate", "measure": label, "kernel": args.kernel,
        "q": args.q, "scales": [float(e) for e in eps], "results": results,
    })
    if not args.no_plot:
        plots.plot_estimate(series_by_kind, estimates, png_path)
    for r in results:
        print(f"{r['kind']}: slope={r['slope']:.6f} upper={r['upper']:.6f} "
              f"lower={r['lower']:.6f}")
    return 0


def cmd_derivative_check(args) -> int:
    mu, label = _load_measure(args)
    kernel = parse_kernel(args.kernel)
    eps = parse_scales(args.scales)
    _warn_scale_fidelity(mu, float(eps[-1]))
    quad = _quad_from(args)
    step = 1e-3
    rows = []
    all_pass = True
    max_resid = 0.0
    for e in eps:
        rep = norm_derivative(mu, kernel, float(e), args.q, quad)
        chk = check_slope_bounds(rep, kernel)
        up = lq_norm(mu, kernel, float(e) * math.exp(step), args.q, quad)
        dn = lq_norm(mu, kernel, float(e) * math.exp(-step), args.q, quad)
        fd = (math.log(up) - math.log(dn)) / (2.0 * step)
        resid = abs(rep.loglog_slope - fd)
        max_resid = max(max_resid, resid)
        all_pass = all_pass and chk.passed
        rows.append({
            "eps": float(e), "lambda": math.log(e), "norm": rep.norm,
            "slope": rep.loglog_slope, "lower_bound": rep.bounds[0],
            "upper_bound": rep.bounds[1], "fd_slope": fd, "fd_residual": resid,
            "bounds_pass": chk.passed,
        })
    csv_path, json_path, png_path = _out_paths(args.out)
    _write_csv(csv_path, ["eps", "lambda", "norm", "slope", "lower_bound",
                          "upper_bound", "fd_slope", "fd_residual", "bounds_pass"], rows)
    _write_summary(json_path, {
        "command": "derivative-check", "measure": label, "kernel": args.kernel,
        "q": args.q, "scales": [float(e) for e in eps],
        "max_fd_residual": max_resid, "all_bounds_pass": all_pass,
    })
    if not args.no_plot:
        plots.plot_derivative_check(rows, png_path)
    print(f"max |analytic - finite difference| = {max_resid:.3g}; "
          f"bounds {'pass' if all_pass else 'FAIL'}")
    return 0


def cmd_schedule(args) -> int:
    mu, label = _load_measure(args)
    kernel = parse_kernel(args.kernel)
    sched = parse_schedule_spec(args.schedule)
    _warn_scale_fidelity(mu, float(sched.eps_values()[-1]))
    report = run_schedule(mu, kernel, sched, args.q, _quad_from(args))
    csv_path, json_path, png_path = _out_paths(args.out)
    _write_csv(csv_path, ["n", "eps", "norm", "diff", "ln_diff", "ratio"],
               report_to_rows(report))
    _write_summary(json_path, {
        "command": "schedule", "measure": label, "kernel": args.kernel,
        "kind": sched.kind, "t": sched.t, "q": args.q, "m_hat": report.m_hat,
        "d_hat": report.d_hat, "critical_t": report.critical_t,
        "in_I_q": report.in_iq, "n_range": [sched.n_start, sched.n_stop],
    })
    if not args.no_plot:
        plots.plot_schedule(report, png_path)
    ct = "inf" if math.isinf(report.critical_t) else f"{report.critical_t:.4f}"
    print(f"m_hat={report.m_hat:.4f} critical_t={ct} in_I_q={report.in_iq}")
    return 0


def cmd_compare_partitions(args) -> int:
    mu, label = _load_measure(args)
    kernel = parse_kernel(args.kernel)
    eps = parse_scales(args.scales)
    _warn_scale_fidelity(mu, float(eps[-1]))
    quad = _quad_from(args)
    kinds = args.kind or list(KIND_NAMES)
    curves = {}
    slopes = {}
    for tag in kinds:
        kind = make_kind(tag, kernel)
        curves[tag] = [evaluate(kind, mu, float(e), args.q, quad=quad) for e in eps]
        try:
            series = sample_series(kind, mu, args.q, eps, quad=quad)
            slopes[tag] = estimate_orders(series).slope
        except DegenerateSeriesError:
            slopes[tag] = None
    rows = [{"eps": float(e), **{tag: curves[tag][i] for tag in kinds}}
            for i, e in enumerate(eps)]
    csv_path, json_path, png_path = _out_paths(args.out)
    _write_csv(csv_path, ["eps"] + kinds, rows)
    _write_summary(json_path, {
        "command": "compare-partitions", "measure": label, "kernel": args.kernel,
        "q": args.q, "scales": [float(e) for e in eps], "kinds": kinds,
        "slopes": slopes,
    })
    if not args.no_plot:
        plots.plot_compare(eps, curves, png_path)
    printable = {k: (f"{v:.4f}" if v is not None else "n/a") for k, v in slopes.items()}
    print("slopes: " + " ".join(f"{k}={v}" for k, v in printable.items()))
    return 0


def _add_common(p, scales_default=None, scales_required=True):
    p.add_argument("--measure", required=True,
                   help="generator spec (point, two-point, cantor:depth=10, "
                        "uniform:dim=1,n=256, random:dim=2,n=50,seed=7) or .json/.pgm path")
    p.add_argument("--kernel", default="gaussian", help="gaussian or bump:INNER,OUTER")
    p.add_argument("--q", type=float, required=True, help="moment exponent")
    if scales_default is not None:
        p.add_argument("--scales", default=scales_default,
                       help=f"BASE^A..BASE^B or comma list (default {scales_default})")
    elif scales_required:
        p.add_argument("--scales", required=True, help="BASE^A..BASE^B or comma list")
    p.add_argument("--out", required=True, help="CSV output path (JSON/PNG use the same stem)")
    p.add_argument("--normalize", action="store_true", help="rescale total mass to 1")
    p.add_argument("--quad-points", type=int, default=DEFAULT_QUAD.points_per_scale,
                   help="quadrature points per scale (default 8)")
    p.add_argument("--quad-tol", type=float, default=DEFAULT_QUAD.tail_tolerance,
                   help="kernel tail tolerance for grid padding (default 1e-12)")
    p.add_argument("--seed", type=int, default=0, help="seed for random measure specs")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filtdim",
        description="Gaussian-filtered norms, partition functions, dimension "
                    "estimates, and scale schedules for atomic measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a measure and write it as JSON")
    p.add_argument("--cantor", nargs="?", const="", metavar="depth=10[,ratio=R,p=P]")
    p.add_argument("--uniform", nargs="?", const="", metavar="dim=1,n=256")
    p.add_argument("--point", nargs="?", const="", metavar="[dim=1]")
    p.add_argument("--two-point", nargs="?", const="", metavar="[sep=1,dim=1]")
    p.add_argument("--random", nargs="?", const="", metavar="dim=2,n=50,seed=7")
    p.add_argument("--measure", help="generator spec (alternative to the flags above)")
    p.add_argument("--normalize", action="store_true", help="rescale total mass to 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("estimate", help="dimension estimates from partition functions")
    _add_common(p)
    p.add_argument("--kind", action="append", choices=list(KIND_NAMES),
                   help="partition kind (repeatable; default box)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("derivative-check",
                       help="analytic scale derivative, bounds, finite differences")
    _add_common(p, scales_default="2^2..2^-8")
    p.set_defaults(func=cmd_derivative_check)

    p = sub.add_parser("schedule", help="norm differences along a scale schedule")
    _add_common(p, scales_required=False)
    p.add_argument("--schedule", required=True, help="pow:t=T,n=A..B or geom:n=A..B")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("compare-partitions",
                       help="all partition curves on a shared scale grid")
    _add_common(p)
    p.add_argument("--kind", action="append", choices=list(KIND_NAMES),
                   help="partition kind (repeatable; default: all)")
    p.set_defaults(func=cmd_compare_partitions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FiltdimError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
