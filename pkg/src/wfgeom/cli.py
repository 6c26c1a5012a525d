"""Command-line front end.

Subcommands: sigma, audit, sample, section, equiv, cylinder-compare,
euclidean.  Every command is deterministic for a fixed configuration
including --seed, and output files are byte-identical across reruns and
worker counts.  Exit codes: 0 success (or verdict true), 1 analytic
false verdicts, 2 usage/configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import jsonio
from .euclideaness import EuclideanessConfig, full_report
from .kernel import (
    GeometryError,
    GeometrySpec,
    Kind,
    audit_metric_axioms,
    audit_world_function_axioms,
    classify_interval,
    deformed_minkowski,
    euclidean,
    minkowski,
    sigma,
)
from .multivariance import Cardinality, find_intransitivity_witness, solve_equivalence
from .objects import (
    cloud_diameter,
    cylinder,
    ellipsoid,
    hausdorff_distance,
    sample_object,
    section_of_segment,
    segment,
    sphere,
)
from .sampling import BudgetError, DEFAULT_NODE_BUDGET, Region
from .vectors import vec

__all__ = ["main"]

_SHORTHANDS = {
    "euclid1": lambda a: euclidean(1),
    "euclid2": lambda a: euclidean(2),
    "euclid3": lambda a: euclidean(3),
    "euclid4": lambda a: euclidean(4),
    "mink": lambda a: minkowski(4, a.c),
    "mink2": lambda a: minkowski(2, a.c),
    "mink3": lambda a: minkowski(3, a.c),
    "dmink": lambda a: deformed_minkowski(4, a.c, a.d),
    "dmink2": lambda a: deformed_minkowski(2, a.c, a.d),
    "dmink3": lambda a: deformed_minkowski(3, a.c, a.d),
}


def _geometry(args) -> GeometrySpec:
    name = args.geom
    if name in _SHORTHANDS:
        return _SHORTHANDS[name](args)
    try:
        with open(name, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise GeometryError(
            f"--geom must be one of {sorted(_SHORTHANDS)} or a JSON spec file: {exc}")
    return GeometrySpec.from_json_dict(data)


def _point(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise GeometryError(f"bad point {text!r}, expected comma-separated reals")


def _region(args, dim: int) -> Region:
    if args.region is None:
        return Region(tuple((-1.0, 1.0) for _ in range(dim)))
    region = Region.parse(args.region)
    if region.dim == 1 and dim > 1:
        region = Region(tuple(region.bounds[0] for _ in range(dim)))
    if region.dim != dim:
        raise GeometryError(f"--region has {region.dim} axes, geometry needs {dim}")
    return region


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _echo_geometry(geom: GeometrySpec) -> None:
    print("geometry=" + json.dumps(geom.to_json_dict(), separators=(",", ":")))


def _interval_word(geom: GeometrySpec, kind_value: str) -> str:
    if geom.kind is Kind.EUCLIDEAN or geom.kind is Kind.TABULATED:
        return {"timelike": "positive", "spacelike": "negative", "null": "zero"}[kind_value]
    return kind_value


def _write_cloud(cloud, out: str, fmt: str) -> None:
    if fmt == "json":
        cloud.write_json(out)
    else:
        cloud.to_csv(out)


def _random_points(region: Region, count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in region.bounds])
    hi = np.array([b[1] for b in region.bounds])
    return [tuple(p) for p in rng.uniform(lo, hi, size=(count, region.dim))]


def _sample_points(args, geom: GeometrySpec) -> list:
    if getattr(args, "points", None):
        with open(args.points, "r", encoding="utf-8") as fh:
            return [tuple(float(x) for x in p) for p in json.load(fh)]
    if geom.kind is Kind.TABULATED:
        return [(float(i),) for i in range(geom.table_size)]
    region = _region(args, geom.dim)
    return _random_points(region, args.count, args.seed)


def cmd_sigma(args) -> int:
    geom = _geometry(args)
    p, q = _point(args.p), _point(args.q)
    value = sigma(geom, p, q)
    interval = classify_interval(geom, p, q)
    word = _interval_word(geom, interval.kind.value)
    print(f"sigma={_fmt(value)} two_sigma={_fmt(interval.two_sigma)} class={word}")
    return 0


def cmd_audit(args) -> int:
    geom = _geometry(args)
    pts = _sample_points(args, geom)
    reports = []
    if args.kind in ("metric", "both"):
        reports.append(audit_metric_axioms(geom, pts, tol=args.tol or 1e-9))
    if args.kind in ("world", "both"):
        reports.append(audit_world_function_axioms(geom, pts, tol=args.tol or 1e-9))
    _echo_geometry(geom)
    for rep in reports:
        print(rep.to_text())
    if args.out:
        jsonio.write_path({"reports": [rep.to_dict() for rep in reports]}, args.out)
    return 0 if all(rep.passed for rep in reports) else 1


def _build_object(args, geom: GeometrySpec):
    kind = args.object
    need = {
        "segment": ("p0", "p1"),
        "sphere": ("center", "surface"),
        "ellipsoid": ("f1", "f2", "p"),
        "cylinder": ("p", "f1", "f2"),
    }[kind]
    vals = {}
    for role in need:
        raw = getattr(args, role.replace("-", "_"), None)
        if raw is None:
            raise GeometryError(f"object {kind} needs --{role}")
        vals[role] = _point(raw)
    if kind == "segment":
        return segment(geom, vals["p0"], vals["p1"])
    if kind == "sphere":
        return sphere(geom, vals["center"], vals["surface"])
    if kind == "ellipsoid":
        return ellipsoid(geom, vals["f1"], vals["f2"], vals["p"])
    return cylinder(geom, vals["p"], vals["f1"], vals["f2"])


def _segment_summary(cloud, p0, p1, resolution) -> str:
    pts = cloud.points
    a = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - a
    norm = float(np.sqrt(np.sum(d * d)))
    if norm == 0 or len(pts) == 0:
        return ""
    u = d / norm
    rel = pts - a
    axial = rel @ u
    perp = rel - np.outer(axial, u)
    transverse = float(np.sqrt(np.max(np.sum(perp * perp, axis=-1))))
    band = np.abs(axial - 0.5 * norm) <= max(2.0 * resolution, 0.02 * norm)
    if np.any(band):
        sel = pts[band]
        diff = sel[:, None, :] - sel[None, :, :]
        estimate = float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))
    else:
        estimate = 0.0
    return f" transverse_extent={_fmt(transverse)} section_diameter_estimate={_fmt(estimate)}"


def cmd_sample(args) -> int:
    geom = _geometry(args)
    obj = _build_object(args, geom)
    region = _region(args, geom.dim)
    cloud = sample_object(
        obj, region, args.resolution, args.tol,
        node_budget=args.node_budget, workers=args.workers)
    _echo_geometry(geom)
    extra = ""
    if args.object == "segment" and cloud.count:
        extra = _segment_summary(
            cloud, _point(args.p0), _point(args.p1), args.resolution)
    print(
        f"{cloud.count} points max_abs_residual={_fmt(cloud.max_abs_residual)}"
        f" inapplicable={cloud.meta['inapplicable']}{extra}")
    if args.out:
        _write_cloud(cloud, args.out, args.format)
    return 0


def cmd_section(args) -> int:
    geom = _geometry(args)
    region = _region(args, geom.dim)
    result = section_of_segment(
        geom, _point(args.f1), _point(args.f2), _point(args.p),
        region, args.resolution, args.tol,
        node_budget=args.node_budget, workers=args.workers)
    _echo_geometry(geom)
    print(
        f"{result.cloud.count} points diameter={_fmt(result.diameter)}"
        f" metric={result.diameter_metric}")
    if args.out:
        _write_cloud(result.cloud, args.out, args.format)
    return 0


_CARDINALITY_WORD = {
    Cardinality.UNIQUE: "Unique",
    Cardinality.FINITE_MULTIPLE: "FiniteMultiple",
    Cardinality.CONTINUUM: "Continuum",
    None: "Empty",
}


def cmd_equiv(args) -> int:
    geom = _geometry(args)
    v = vec(_point(args.origin), _point(args.end))
    region = Region.parse(args.region) if args.region else None
    result = solve_equivalence(
        geom, v, _point(args.q0), region=region,
        resolution=args.resolution, tol=args.tol,
        node_budget=args.node_budget, workers=args.workers)
    _echo_geometry(geom)
    growth = "" if result.growth_exponent is None else (
        f" growth_exponent={_fmt(result.growth_exponent)}")
    print(
        f"cardinality={_CARDINALITY_WORD[result.cardinality]}"
        f" clusters={result.cluster_count} solutions={result.solutions.count}{growth}")
    if args.out:
        if args.format == "json":
            jsonio.write_path(result.to_json_dict(), args.out)
        else:
            result.solutions.to_csv(args.out)
    return 0


def cmd_cylinder_compare(args) -> int:
    geom = _geometry(args)
    region = _region(args, geom.dim)
    p, f1, f2, f3 = (_point(args.p), _point(args.f1), _point(args.f2), _point(args.f3))
    cloud_a = sample_object(
        cylinder(geom, p, f1, f2), region, args.resolution, args.tol,
        node_budget=args.node_budget, workers=args.workers)
    cloud_b = sample_object(
        cylinder(geom, p, f1, f3), region, args.resolution, args.tol,
        node_budget=args.node_budget, workers=args.workers)
    h = hausdorff_distance(cloud_a, cloud_b)
    _echo_geometry(geom)
    print(
        f"hausdorff={_fmt(h)} count_a={cloud_a.count} count_b={cloud_b.count}"
        f" resolution={_fmt(args.resolution)}")
    if args.out:
        _write_cloud(cloud_a, f"{args.out}.a.{args.format}", args.format)
        _write_cloud(cloud_b, f"{args.out}.b.{args.format}", args.format)
    return 0


def cmd_euclidean(args) -> int:
    geom = _geometry(args)
    pts = _sample_points(args, geom)
    cfg = EuclideanessConfig(
        seed=args.seed, workers=args.workers, node_budget=args.node_budget)
    report = full_report(geom, pts, cfg)
    _echo_geometry(geom)
    print(report.to_text())
    if args.out:
        report.write_json(args.out)
    return 0 if report.verdict else 1


def _add_common(parser, *, tol_default=None, resolution=False):
    parser.add_argument("--geom", required=True,
                        help="geometry shorthand (euclid2, euclid3, mink, dmink, ...) or JSON spec file")
    parser.add_argument("--c", type=float, default=1.0, help="light speed for Minkowski kinds")
    parser.add_argument("--d", type=float, default=0.1,
                        help="deformation constant for the deformed kind")
    parser.add_argument("--region", default=None,
                        help="box as lo:hi[,lo:hi...]; one pair is replicated across axes")
    parser.add_argument("--tol", type=float, default=tol_default)
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=0,
                        help="scan workers; 0 = available parallelism (results identical)")
    parser.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    if resolution:
        parser.add_argument("--resolution", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfgeom",
        description="distance-only geometry engine: evaluate world functions, audit axioms, "
                    "sample implicit objects, probe vector-equivalence multivariance, and "
                    "check Euclidean structure")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sigma", help="evaluate the world function of a point pair")
    _add_common(p)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.set_defaults(fn=cmd_sigma)

    p = sub.add_parser("audit", help="audit distance / world-function axioms on a sample")
    _add_common(p)
    p.add_argument("--kind", choices=("metric", "world", "both"), default="both")
    p.add_argument("--count", type=int, default=12, help="random sample size")
    p.add_argument("--points", default=None, help="JSON file with explicit sample points")
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("sample", help="sample an implicit object into a point cloud")
    _add_common(p, tol_default=1e-3, resolution=True)
    p.add_argument("--object", required=True,
                   choices=("segment", "sphere", "ellipsoid", "cylinder"))
    for role in ("p0", "p1", "center", "surface", "f1", "f2", "p"):
        p.add_argument(f"--{role}", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("section", help="sample a segment section and report its diameter")
    _add_common(p, tol_default=1e-3, resolution=True)
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--p", required=True)
    p.set_defaults(fn=cmd_section)

    p = sub.add_parser("equiv", help="solve the vector-equivalence equations at a point")
    _add_common(p, resolution=True)
    p.add_argument("--origin", required=True)
    p.add_argument("--end", required=True)
    p.add_argument("--q0", required=True)
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("cylinder-compare",
                       help="compare cylinders sharing an axis through different axis points")
    _add_common(p, tol_default=0.05, resolution=True)
    p.add_argument("--p", required=True)
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--f3", required=True)
    p.set_defaults(fn=cmd_cylinder_compare)

    p = sub.add_parser("euclidean", help="full Euclidean-structure report")
    _add_common(p)
    p.add_argument("--count", type=int, default=12, help="random candidate count")
    p.add_argument("--points", default=None, help="JSON file with explicit candidate points")
    p.set_defaults(fn=cmd_euclidean)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (GeometryError, BudgetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
