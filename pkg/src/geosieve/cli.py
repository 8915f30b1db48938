"""Command line front end for scans, certification checks, and genericization.

Subcommands mirror the library surface: `zoo list` names the built-in
metrics, `scan` runs the rigid-plane scan, `certify <check>` runs one
certification check, `genericize` runs the budgeted pipeline, and
`distance` prints the C^q distance of two metrics.  Exit codes: 0 for
success or a passed check, 2 for a failed check or unsuccessful run, 1
for usage and configuration errors.

Metrics are given as `zoo:name` (with optional `,key=value` parameters)
or as a path to a metric JSON file.  Reports land under --out with file
names fixed by the subcommand, so reruns overwrite rather than scatter.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .certify import (check_christoffel_diffs, check_curvature_diffs,
                      check_field_bounds, check_inverse_diffs, check_lemC,
                      check_main_lemma, check_product_bounds,
                      check_wave_bounds, cq_distance, report_to_json)
from .charts import ChartMetric, metric_from_json, zoo_metric, zoo_names
from .errors import ConfigurationError, GeosieveError
from .grassmann import (plane_from_normal, rigid_report_to_csv,
                        rigid_report_to_json, scan_rigid)
from .perturb import adapted_chart
from .pipeline import RunConfig, genericize
from .tensor import curvature_point

__all__ = ["main"]


def _coerce(text: str):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def _parse_metric(text: str) -> ChartMetric:
    """`zoo:name[,key=value...]` or a path to a metric JSON file."""
    if text.startswith("zoo:"):
        name, _, rest = text[4:].partition(",")
        params = {}
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigurationError(
                    f"zoo parameter {item!r} is not key=value")
            params[key] = _coerce(value)
        return zoo_metric(name, **params)
    path = Path(text)
    if not path.is_file():
        raise ConfigurationError(f"metric file not found: {text}")
    return metric_from_json(path.read_text())


def _parse_vector(text: str, n: int = 3) -> tuple:
    parts = text.split(",")
    if len(parts) != n:
        raise ConfigurationError(f"expected {n} comma-separated values, "
                                 f"got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_grid(text: str) -> tuple:
    return tuple(int(v) for v in _parse_vector(text))


def _parse_s_values(text: str) -> tuple:
    return tuple(float(p) for p in filter(None, text.split(",")))


def _write(out: str, name: str, text: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    target.write_text(text)
    return target


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors routed to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_zoo(args) -> int:
    if args.action != "list":
        raise ConfigurationError(f"unknown zoo action {args.action!r}")
    for name in zoo_names():
        print(name)
    return 0


def _dump_point(metric: ChartMetric, point: tuple) -> None:
    cp = curvature_point(metric, np.asarray(point)[None])
    doc = {field: getattr(cp, field)[0].tolist()
           for field in ("points", "g", "ginv", "gamma2",
                         "riemann", "cov_riemann")}
    print(json.dumps(doc))


def _cmd_scan(args) -> int:
    metric = _parse_metric(args.metric)
    if args.dump_point is not None:
        _dump_point(metric, _parse_vector(args.dump_point))
        return 0
    report = scan_rigid(metric, _parse_grid(args.base_grid),
                        args.fiber_grid, args.threshold)
    print(f"planes={len(report.planes)} min_overall={report.min_overall:.17g} "
          f"threshold={report.threshold:.17g}")
    if args.out is not None:
        _write(args.out, "report.json", rigid_report_to_json(report))
        _write(args.out, "report.csv", rigid_report_to_csv(report))
    return 0


def _layer_scenario(args):
    """Base metric, adapted one-layer spec, and strengths from check flags."""
    base = _parse_metric(args.metric)
    plane = plane_from_normal(base, _parse_vector(args.center),
                              _parse_vector(args.normal))
    _, spec = adapted_chart(base, plane, K=args.K, eps=args.eps,
                            rho=args.rho, eta_pad=args.eta_pad)
    return base, plane, spec, _parse_s_values(args.s)


def _certify_report(args):
    check = args.check
    if check == "lemma-local-r":
        return check_wave_bounds(args.K, args.eps, args.samples)
    if check == "lemma-local-m":
        return check_field_bounds(args.K, args.eps, args.rho, args.eta_pad,
                                  _parse_grid(args.grid))
    if check == "product-bounds":
        return check_product_bounds(trials=args.trials, seed=args.seed)
    if check in ("prop-christoffel", "prop-inverse", "prop-curvature"):
        base, _, spec, s_values = _layer_scenario(args)
        run = {"prop-christoffel": check_christoffel_diffs,
               "prop-inverse": check_inverse_diffs,
               "prop-curvature": check_curvature_diffs}[check]
        return run(base, base.with_layer(spec), spec, s_values,
                   grid=_parse_grid(args.grid))
    if check == "main-lemma":
        base, plane, spec, s_values = _layer_scenario(args)
        return check_main_lemma(base, plane, spec, s_values,
                                ball_samples=args.ball_samples,
                                seed=args.seed, rigid_tol=args.rigid_tol)
    if check == "lem-c":
        base, plane, spec, s_values = _layer_scenario(args)

        def family(s: float) -> ChartMetric:
            return base.with_layer(spec.with_s(s)) if s else base

        return check_lemC(base, family, [(plane, args.region_radius)],
                          [(plane, args.hood_radius)], s_values,
                          samples_per_ball=args.samples_per_ball,
                          seed=args.seed)
    raise ConfigurationError(f"unknown check {check!r}")


def _cmd_certify(args) -> int:
    report = _certify_report(args)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{args.check}: {verdict} max_residual={report.max_residual:.17g}")
    if args.out is not None:
        _write(args.out, f"{args.check}.json", report_to_json(report))
    return 0 if report.passed else 2


_CONFIG_CASTS = {
    "xi": float, "threshold": float, "K": float, "eps": float,
    "rho": float, "eta_pad": float, "target_margin": float,
    "fiber_grid": int, "max_iterations": int, "seed": int,
    "base_grid": _parse_grid, "metric": str, "output_dir": str,
}


def _read_config(path: str) -> dict:
    """Key-value lines (`key = value`), keys matching RunConfig fields."""
    source = Path(path)
    if not source.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(source.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value or key not in _CONFIG_CASTS:
            raise ConfigurationError(
                f"{path}:{lineno}: expected `field = value` with a "
                f"RunConfig field, got {raw!r}")
        values[key] = _CONFIG_CASTS[key](value)
    return values


def _cmd_genericize(args) -> int:
    fields = dict(_read_config(args.config)) if args.config else {}
    flags = {
        "metric": args.metric, "xi": args.xi, "threshold": args.threshold,
        "K": args.K, "eps": args.eps, "rho": args.rho,
        "eta_pad": args.eta_pad, "target_margin": args.target_margin,
        "fiber_grid": args.fiber_grid, "max_iterations": args.max_iterations,
        "seed": args.seed, "output_dir": args.out,
    }
    if args.base_grid is not None:
        flags["base_grid"] = _parse_grid(args.base_grid)
    fields.update((k, v) for k, v in flags.items() if v is not None)
    for required in ("metric", "xi"):
        if required not in fields:
            raise ConfigurationError(
                f"genericize needs --{required} or a config file line "
                f"setting {required}")
    fields["metric"] = _parse_metric(fields["metric"])
    cert = genericize(RunConfig(**fields))
    print(f"succeeded={cert.succeeded} iterations={cert.iterations} "
          f"balls={len(cert.balls)} final_minG={cert.final_minG:.17g} "
          f"c3_used={cert.c3_used:.17g} stop={cert.stop_reason}")
    return 0 if cert.succeeded else 2


def _cmd_distance(args) -> int:
    g1 = _parse_metric(args.g1)
    g2 = _parse_metric(args.g2)
    print(format(cq_distance(g1, g2, q=args.q, grid=_parse_grid(args.grid)),
                 ".17g"))
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_layer_flags(p, metric: str, center: str, normal: str, s: str):
    p.add_argument("--metric", default=metric)
    p.add_argument("--center", default=center)
    p.add_argument("--normal", default=normal)
    p.add_argument("--K", type=float, default=100.0)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--eta-pad", dest="eta_pad", type=float, default=0.1)
    p.add_argument("--s", default=s)


def _build_parser() -> _Parser:
    parser = _Parser(prog="geosieve",
                     description="Plane-genericity scans, certification "
                                 "checks, and budgeted metric deformation.")
    sub = parser.add_subparsers(dest="command", required=True)

    zoo = sub.add_parser("zoo", help="built-in metric catalogue")
    zoo.add_argument("action", choices=["list"])
    zoo.set_defaults(run=_cmd_zoo)

    scan = sub.add_parser("scan", help="rigid-plane scan over a lattice")
    scan.add_argument("--metric", required=True)
    scan.add_argument("--base-grid", default="8,8,8")
    scan.add_argument("--fiber-grid", type=int, default=32)
    scan.add_argument("--threshold", type=float, default=1e-6)
    scan.add_argument("--out")
    scan.add_argument("--dump-point", metavar="X,Y,Z",
                      help="debug: print curvature data at one point as "
                           "JSON and skip the scan")
    scan.set_defaults(run=_cmd_scan)

    cert = sub.add_parser("certify", help="run one certification check")
    checks = cert.add_subparsers(dest="check", required=True)

    p = checks.add_parser("lemma-local-r", help="wave bounds and dichotomy")
    p.add_argument("--K", type=float, default=100.0)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=100000)

    p = checks.add_parser("lemma-local-m", help="windowed-field bounds")
    p.add_argument("--K", type=float, default=100.0)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--eta-pad", dest="eta_pad", type=float, default=0.1)
    p.add_argument("--grid", default="16,16,16")

    for name, blurb in (("prop-christoffel", "Christoffel difference laws"),
                        ("prop-inverse", "inverse-metric difference law"),
                        ("prop-curvature", "curvature difference laws")):
        p = checks.add_parser(name, help=blurb)
        _add_layer_flags(p, "zoo:flat_torus", "0.5,0.5,0.5", "0,0,1",
                         "0,1e-3,1e-2")
        p.add_argument("--grid", default="16,16,16")

    p = checks.add_parser("main-lemma", help="score growth over a ball")
    _add_layer_flags(p, "zoo:flat_torus", "0.5,0.5,0.5", "0,0,1",
                     "1e-3,1e-2")
    p.add_argument("--ball-samples", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rigid-tol", type=float, default=1e-8)

    p = checks.add_parser("lem-c", help="off-neighborhood persistence")
    _add_layer_flags(p, "zoo:random_fourier,seed=7,amp=0.01",
                     "0.5,0.5,0.5", "0.2,-0.3,0.93", "1e-3,1e-2")
    p.add_argument("--region-radius", type=float, default=0.35)
    p.add_argument("--hood-radius", type=float, default=0.15)
    p.add_argument("--samples-per-ball", type=int, default=60)
    p.add_argument("--seed", type=int, default=5)

    p = checks.add_parser("product-bounds", help="triple-product bounds")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    for p in checks.choices.values():
        p.add_argument("--out")
    cert.set_defaults(run=_cmd_certify)

    gen = sub.add_parser("genericize", help="budgeted genericization run")
    gen.add_argument("--metric")
    gen.add_argument("--xi", type=float)
    gen.add_argument("--base-grid")
    gen.add_argument("--fiber-grid", type=int)
    gen.add_argument("--threshold", type=float)
    gen.add_argument("--K", type=float)
    gen.add_argument("--eps", type=float)
    gen.add_argument("--rho", type=float)
    gen.add_argument("--eta-pad", dest="eta_pad", type=float)
    gen.add_argument("--max-iterations", type=int)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--target-margin", dest="target_margin", type=float)
    gen.add_argument("--config", help="key-value file with RunConfig fields")
    gen.add_argument("--out")
    gen.set_defaults(run=_cmd_genericize)

    dist = sub.add_parser("distance", help="C^q distance of two metrics")
    dist.add_argument("--g1", required=True)
    dist.add_argument("--g2", required=True)
    dist.add_argument("--q", type=int, default=3)
    dist.add_argument("--grid", default="16,16,16")
    dist.set_defaults(run=_cmd_distance)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.run(args)
    except GeosieveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
