"""Implicit geometric objects and their extraction into point clouds.

Objects are predicates over probe points built from the world function:

  segment    sqrt(2s(P0,R)) + sqrt(2s(R,P1)) - sqrt(2s(P0,P1))
  sphere     rho(O,R) - rho(O,P)
  ellipsoid  (rho(F1,R) + rho(F2,R)) - (rho(F1,P) + rho(F2,P))
  cylinder   area(F1,F2,R) - area(F1,F2,P), triangle area from side
             lengths (Heron)
  section    max distance mismatch to both segment ends at a fixed P

with rho = sqrt(2*sigma).  A probe where some needed 2*sigma is
negative has no real residual: scalar evaluation raises
InapplicablePointError, batch evaluation yields NaN and samplers count
the probe as inapplicable.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .jsonio import write_path as _write_json, read_path as _read_json
from .kernel import GeometryError, GeometrySpec, InapplicablePointError, Kind, sigma
from .sampling import (
    DEFAULT_NODE_BUDGET,
    Region,
    grid_scan,
    lex_sort,
    refine_points,
)
from .vectors import Point, as_point

__all__ = [
    "ObjectKind",
    "ImplicitObject",
    "segment",
    "sphere",
    "ellipsoid",
    "cylinder",
    "section",
    "predicate_residual",
    "residual_batch",
    "PointCloud",
    "EmptyCloudError",
    "sample_object",
    "SectionResult",
    "section_of_segment",
    "cloud_diameter",
    "hausdorff_distance",
]


class ObjectKind(str, enum.Enum):
    SPHERE = "sphere"
    ELLIPSOID = "ellipsoid"
    SEGMENT = "segment"
    CYLINDER = "cylinder"
    SECTION = "section"


@dataclass(frozen=True)
class ImplicitObject:
    """A predicate over probe points, plus its role-named defining points."""

    kind: ObjectKind
    geometry: GeometrySpec
    points: tuple[tuple[str, Point], ...]

    def point(self, role: str) -> Point:
        for name, p in self.points:
            if name == role:
                return p
        raise KeyError(role)

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "points": {name: list(p) for name, p in self.points},
        }


def _make(kind: ObjectKind, geom: GeometrySpec, **roles) -> ImplicitObject:
    pts = []
    for name, p in roles.items():
        p = as_point(p)
        if len(p) != geom.dim:
            raise GeometryError(f"{kind.value} point {name} has arity {len(p)}, need {geom.dim}")
        pts.append((name, p))
    return ImplicitObject(kind=kind, geometry=geom, points=tuple(pts))


def segment(geom: GeometrySpec, p0, p1) -> ImplicitObject:
    return _make(ObjectKind.SEGMENT, geom, p0=p0, p1=p1)


def sphere(geom: GeometrySpec, center, surface_point) -> ImplicitObject:
    return _make(ObjectKind.SPHERE, geom, center=center, surface=surface_point)


def ellipsoid(geom: GeometrySpec, f1, f2, p) -> ImplicitObject:
    return _make(ObjectKind.ELLIPSOID, geom, f1=f1, f2=f2, p=p)


def cylinder(geom: GeometrySpec, p, f1, f2) -> ImplicitObject:
    obj = _make(ObjectKind.CYLINDER, geom, p=p, f1=f1, f2=f2)
    if obj.point("f1") == obj.point("f2"):
        raise GeometryError("cylinder axis is degenerate: f1 == f2")
    return obj


def section(geom: GeometrySpec, f1, f2, p) -> ImplicitObject:
    return _make(ObjectKind.SECTION, geom, f1=f1, f2=f2, p=p)


def _rho(geom, a, b):
    s = 2.0 * np.asarray(sigma(geom, a, b), dtype=float)
    with np.errstate(invalid="ignore"):
        return np.sqrt(np.where(s < 0, np.nan, s))


def _tri_area(a, b, c):
    # 16*S^2 = ((b+c)^2 - a^2) * (a^2 - (b-c)^2); either factor negative
    # means no real triangle with these side lengths exists here
    f1 = (b + c) * (b + c) - a * a
    f2 = a * a - (b - c) * (b - c)
    with np.errstate(invalid="ignore"):
        return 0.25 * np.sqrt(np.where((f1 < 0) | (f2 < 0), np.nan, f1 * f2))


def residual_batch(obj: ImplicitObject, probes) -> np.ndarray:
    """Defining-equation residual at each probe row; NaN where inapplicable."""
    geom = obj.geometry
    r = np.asarray(probes, dtype=float)
    kind = obj.kind
    if kind is ObjectKind.SEGMENT:
        p0, p1 = obj.point("p0"), obj.point("p1")
        out = _rho(geom, p0, r) + _rho(geom, r, p1) - _rho(geom, p0, p1)
    elif kind is ObjectKind.SPHERE:
        o, p = obj.point("center"), obj.point("surface")
        out = _rho(geom, o, r) - _rho(geom, o, p)
    elif kind is ObjectKind.ELLIPSOID:
        f1, f2, p = obj.point("f1"), obj.point("f2"), obj.point("p")
        out = (_rho(geom, f1, r) + _rho(geom, f2, r)) - (_rho(geom, f1, p) + _rho(geom, f2, p))
    elif kind is ObjectKind.CYLINDER:
        p, f1, f2 = obj.point("p"), obj.point("f1"), obj.point("f2")
        a = _rho(geom, f1, f2)
        out = _tri_area(a, _rho(geom, f1, r), _rho(geom, f2, r)) - _tri_area(
            a, _rho(geom, f1, p), _rho(geom, f2, p))
    elif kind is ObjectKind.SECTION:
        f1, f2, p = obj.point("f1"), obj.point("f2"), obj.point("p")
        out = np.maximum(
            np.abs(_rho(geom, f1, r) - _rho(geom, f1, p)),
            np.abs(_rho(geom, f2, r) - _rho(geom, f2, p)),
        )
    else:  # pragma: no cover
        raise GeometryError(f"unknown object kind {kind!r}")
    return np.asarray(out, dtype=float)


def predicate_residual(obj: ImplicitObject, probe) -> float:
    """Residual at a single probe; exactly 0 on the object."""
    out = residual_batch(obj, np.asarray(as_point(probe), dtype=float)[None, :])[0]
    if not np.isfinite(out):
        raise InapplicablePointError(
            f"no real residual for {obj.kind.value} at {tuple(probe)}: "
            "a required 2*sigma is negative")
    return float(out)


class EmptyCloudError(ValueError):
    """Operation needs a non-empty point cloud."""


@dataclass
class PointCloud:
    """Finite sample of points satisfying a predicate within tol.

    points are sorted lexicographically and every stored residual obeys
    |residual| <= tol.  meta carries sampling provenance (object
    description, node counts, inapplicable probes).
    """

    geometry: GeometrySpec
    points: np.ndarray
    residuals: np.ndarray
    region: Region
    resolution: float
    tol: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, self.region.dim)
        self.residuals = np.asarray(self.residuals, dtype=float).reshape(-1)
        if len(self.points) != len(self.residuals):
            raise ValueError("points and residuals disagree in length")
        if np.any(np.abs(self.residuals) > self.tol):
            raise ValueError("point cloud holds residuals above its tolerance")
        self.points, self.residuals = lex_sort(self.points, self.residuals)

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.count else 0.0

    def to_csv(self, path) -> None:
        """One row per point: coordinates then residual; header x0,..,residual."""
        dim = self.region.dim
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"x{i}" for i in range(dim)] + ["residual"])
            for p, r in zip(self.points, self.residuals):
                writer.writerow([repr(float(v)) for v in p] + [repr(float(r))])

    def to_json_dict(self) -> dict:
        return {
            "geometry": self.geometry.to_json_dict(),
            "region": self.region.to_json(),
            "resolution": self.resolution,
            "tol": self.tol,
            "count": self.count,
            "max_abs_residual": self.max_abs_residual,
            "meta": self.meta,
            "points": [list(p) for p in self.points],
            "residuals": list(self.residuals),
        }

    def write_json(self, path) -> None:
        _write_json(self.to_json_dict(), path)

    @classmethod
    def from_json_dict(cls, data: dict) -> "PointCloud":
        return cls(
            geometry=GeometrySpec.from_json_dict(data["geometry"]),
            points=np.asarray(data["points"], dtype=float),
            residuals=np.asarray(data["residuals"], dtype=float),
            region=Region(tuple((lo, hi) for lo, hi in data["region"])),
            resolution=float(data["resolution"]),
            tol=float(data["tol"]),
            meta=dict(data.get("meta", {})),
        )

    @classmethod
    def read_json(cls, path) -> "PointCloud":
        return cls.from_json_dict(_read_json(path))


def sample_object(
    obj: ImplicitObject,
    region: Region,
    resolution: float,
    tol: float,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
    refine: bool = True,
) -> PointCloud:
    """Level-set extraction: grid scan, then per-node axis bisection.

    Keeps every grid node with |residual| <= tol, then tries to push
    each accepted node's residual below tol/10 by bisecting along the
    grid axes (possible only where the signed residual changes sign).
    Deterministic for fixed inputs; the node budget bounds grid size.
    """
    if region.dim != obj.geometry.dim:
        raise GeometryError("region arity does not match the geometry")
    scan = grid_scan(
        lambda pts: residual_batch(obj, pts),
        region, resolution, tol, node_budget=node_budget, workers=workers)
    pts, res = scan.points, scan.residuals
    if refine and len(pts):
        pts, res = refine_points(
            pts, res, lambda probes: residual_batch(obj, probes), resolution, tol / 10.0)
    meta = {
        "object": obj.describe(),
        "nodes_scanned": scan.nodes_total,
        "inapplicable": scan.inapplicable,
    }
    return PointCloud(
        geometry=obj.geometry, points=pts, residuals=res, region=region,
        resolution=resolution, tol=tol, meta=meta)


def _hull_candidates(pts: np.ndarray) -> np.ndarray:
    """Points that can realize the coordinate diameter: hull vertices.

    Degenerate clouds (lower affine rank than the ambient space) are
    first projected onto their affine span so qhull sees full rank.
    """
    from scipy.spatial import ConvexHull, QhullError

    center = pts.mean(axis=0)
    shifted = pts - center
    _, sv, vt = np.linalg.svd(shifted, full_matrices=False)
    scale = sv[0] if len(sv) else 0.0
    rank = int(np.sum(sv > 1e-12 * max(scale, 1.0)))
    if rank <= 1:
        axis = vt[0] if rank else np.zeros(pts.shape[1])
        proj = shifted @ axis
        return pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
    reduced = shifted @ vt[:rank].T
    try:
        hull = ConvexHull(reduced)
        return pts[hull.vertices]
    except QhullError:
        return pts


def cloud_diameter(cloud: PointCloud, pairwise_limit: int = 4000) -> tuple[float, str]:
    """Largest pairwise separation within a cloud.

    Measured with the geometry's own distance when every pair has
    2*sigma >= 0; otherwise falls back to the coordinate-label metric
    and says so ("coordinate" instead of "world").  Above the pairwise
    size limit, clouds are reduced to their convex-hull vertices first;
    that is exact for the coordinate metric (and for the Euclidean
    kernel, whose world distance equals it), while other kernels report
    the coordinate metric outright.
    """
    pts = cloud.points
    m = len(pts)
    if m <= 1:
        return 0.0, "world"
    geom = cloud.geometry
    if m > pairwise_limit:
        pts = _hull_candidates(pts)
        m = len(pts)
        if geom.kind is not Kind.EUCLIDEAN:
            diff = pts[:, None, :] - pts[None, :, :]
            return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1)))), "coordinate"
    max_s2 = -np.inf
    min_s2 = np.inf
    block = max(1, int(2_000_000 / max(m, 1)))
    for lo in range(0, m, block):
        s2 = 2.0 * np.asarray(
            sigma(geom, pts[lo:lo + block, None, :], pts[None, :, :]), dtype=float)
        max_s2 = max(max_s2, float(s2.max()))
        min_s2 = min(min_s2, float(s2.min()))
    if min_s2 >= 0:
        return float(np.sqrt(max_s2)), "world"
    best = 0.0
    for lo in range(0, m, block):
        diff = pts[lo:lo + block, None, :] - pts[None, :, :]
        best = max(best, float(np.max(np.sum(diff * diff, axis=-1))))
    return float(np.sqrt(best)), "coordinate"


@dataclass
class SectionResult:
    cloud: PointCloud
    diameter: float
    diameter_metric: str  # "world" or "coordinate"


def section_of_segment(
    geom: GeometrySpec,
    f1,
    f2,
    p,
    region: Region,
    resolution: float,
    tol: float,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> SectionResult:
    """Sample the cross-section of the segment [f1, f2] through p.

    p must itself satisfy the segment equation within tol.  The
    diameter of the sampled section is 0 for a singleton; it measures
    the thickness of the segment at p.
    """
    seg_residual = predicate_residual(segment(geom, f1, f2), p)
    if abs(seg_residual) > tol:
        raise GeometryError(
            f"p is not on the segment within tol: residual {seg_residual!r} > {tol!r}")
    obj = section(geom, f1, f2, p)
    cloud = sample_object(
        obj, region, resolution, tol, node_budget=node_budget, workers=workers)
    diameter, metric = cloud_diameter(cloud)
    cloud.meta["section_diameter"] = diameter
    cloud.meta["section_diameter_metric"] = metric
    return SectionResult(cloud=cloud, diameter=diameter, diameter_metric=metric)


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """Symmetric Hausdorff distance between two clouds.

    Uses the Euclidean metric on coordinate labels as a comparison
    device (world distances may not exist between arbitrary pairs).
    """
    if a.count == 0 or b.count == 0:
        raise EmptyCloudError("hausdorff distance needs two non-empty clouds")
    if a.geometry != b.geometry:
        raise GeometryError("clouds come from different geometries")
    d_ab = np.max(cKDTree(b.points).query(a.points)[0])
    d_ba = np.max(cKDTree(a.points).query(b.points)[0])
    return float(max(d_ab, d_ba))
