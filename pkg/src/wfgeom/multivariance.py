"""Solution sets of the vector-equivalence equations at a target point.

Given a reference vector v and a point q0, the end points q1 making
(q0 -> q1) equivalent to v solve two equations: equal scalar product
and equal length.  The proper Euclidean kernel has exactly one solution
for every nonzero v; deformed kernels can carry whole manifolds of
them, which is what the cardinality classification detects.  Where a
geometry is multivariant, equivalence also stops being transitive, and
a witness triple can be exhibited.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .kernel import GeometryError, GeometrySpec, sigma
from .objects import PointCloud
from .sampling import (
    DEFAULT_NODE_BUDGET,
    Region,
    cluster_diameter,
    cluster_points,
    grid_scan,
    lex_sort,
    refine_points,
)
from .vectors import (
    PointPairVector,
    _equivalence_terms,
    equivalence_residual,
    is_equivalent,
    pair_scalar_product,
    vec,
)

__all__ = [
    "Cardinality",
    "EquivalenceSolutionSet",
    "solve_equivalence",
    "IntransitivityWitness",
    "find_intransitivity_witness",
]


class Cardinality(str, enum.Enum):
    UNIQUE = "unique"
    FINITE_MULTIPLE = "finite_multiple"
    CONTINUUM = "continuum"


@dataclass
class EquivalenceSolutionSet:
    """Sampled end points q1 with both equivalence equations within tol."""

    reference: PointPairVector
    target_origin: tuple
    solutions: PointCloud
    cardinality: Cardinality | None
    cluster_count: int
    cluster_centers: np.ndarray
    growth_exponent: float | None
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = self.solutions.to_json_dict()
        out["equivalence"] = {
            "reference_origin": list(self.reference.origin),
            "reference_end": list(self.reference.end),
            "target_origin": list(self.target_origin),
            "cardinality": self.cardinality.value if self.cardinality else None,
            "cluster_count": self.cluster_count,
            "cluster_centers": [list(c) for c in self.cluster_centers],
            "growth_exponent": self.growth_exponent,
            "diagnostics": self.diagnostics,
        }
        return out


def _coord_norm(v: PointPairVector) -> float:
    d = np.asarray(v.end, dtype=float) - np.asarray(v.origin, dtype=float)
    return float(np.sqrt(np.sum(d * d)))


def translation_guess(v: PointPairVector, q0) -> tuple:
    """Coordinate translate of v to q0; a search heuristic, not geometry."""
    d = np.asarray(v.end, dtype=float) - np.asarray(v.origin, dtype=float)
    return tuple(np.asarray(q0, dtype=float) + d)


def equivalence_residuals_at(geom: GeometrySpec, v: PointPairVector, q0, ends) -> np.ndarray:
    """Batch residual of both equivalence equations for candidate ends."""
    ends = np.asarray(ends, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    s1 = 2.0 * sigma(geom, v.origin, v.end)
    s2 = 2.0 * np.asarray(sigma(geom, q0, ends), dtype=float)
    sp = np.asarray(
        pair_scalar_product(geom, np.asarray(v.origin, float), np.asarray(v.end, float),
                            q0, ends), dtype=float)
    r = _equivalence_terms(s1, s2, sp)
    # the zero vector at q0 is a valid candidate only for a zero reference
    zero_end = np.all(ends == q0, axis=-1)
    return np.where(zero_end, 0.0 if v.is_zero() else np.inf, r)


def default_search_region(v: PointPairVector, q0, resolution: float) -> Region:
    half = 3.0 * max(_coord_norm(v), resolution)
    return Region.around(translation_guess(v, q0), half)


def _scan_solutions(geom, v, q0, region, resolution, tol, node_budget, workers):
    return grid_scan(
        lambda pts: equivalence_residuals_at(geom, v, q0, pts),
        region, resolution, tol, node_budget=node_budget, workers=workers)


def solve_equivalence(
    geom: GeometrySpec,
    v: PointPairVector,
    q0,
    region: Region | None = None,
    resolution: float = 0.25,
    tol: float | None = None,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> EquivalenceSolutionSet:
    """Enumerate end points equivalent to v at q0 and classify their cardinality.

    Scans the region twice (at resolution and resolution/2).  Solutions
    are clustered with linking radius 3*resolution; the set is unique
    when one cluster no wider than the radius survives both scans,
    finite-multiple when a stable multi-cluster count survives halving,
    and a continuum when the accepted-node count grows like
    (1/resolution)^k with k >= 1.
    """
    v = vec(v.origin, v.end)
    q0 = tuple(float(x) for x in q0)
    if len(q0) != geom.dim:
        raise GeometryError("target origin arity does not match the geometry")
    if tol is None:
        tol = resolution * (1.0 + _coord_norm(v)) / 8.0

    if v.is_zero():
        # a zero vector is equivalent exactly to the zero vector at q0
        pts = np.asarray([q0], dtype=float)
        cloud = PointCloud(
            geometry=geom, points=pts, residuals=np.zeros(1),
            region=region or Region.around(q0, resolution),
            resolution=resolution, tol=tol,
            meta={"equivalence_reference": "zero-vector", "nodes_scanned": 0,
                  "inapplicable": 0})
        return EquivalenceSolutionSet(
            reference=v, target_origin=q0, solutions=cloud,
            cardinality=Cardinality.UNIQUE, cluster_count=1,
            cluster_centers=pts.copy(), growth_exponent=None,
            diagnostics={"degenerate": "zero reference vector"})

    if region is None:
        region = default_search_region(v, q0, resolution)

    base = _scan_solutions(geom, v, q0, region, resolution, tol, node_budget, workers)
    fine = _scan_solutions(geom, v, q0, region, resolution / 2.0, tol, node_budget, workers)

    pts, res = lex_sort(base.points, base.residuals)
    if len(pts):
        pts, res = refine_points(
            pts, res,
            lambda probes: equivalence_residuals_at(geom, v, q0, probes),
            resolution, tol / 10.0)
        pts, res = lex_sort(pts, res)
    fine_pts, _ = lex_sort(fine.points, fine.residuals)

    radius = 3.0 * resolution
    clusters = cluster_points(pts, radius)
    clusters_fine = cluster_points(fine_pts, radius / 2.0)
    centers = np.asarray([pts[idx].mean(axis=0) for idx in clusters]) if clusters else (
        np.empty((0, geom.dim)))

    n1, n2 = len(pts), len(fine_pts)
    growth = float(np.log2(n2 / n1)) if (n1 > 0 and n2 > 0) else None
    diagnostics = {
        "count_base": n1,
        "count_halved": n2,
        "clusters_base": len(clusters),
        "clusters_halved": len(clusters_fine),
    }

    if n1 == 0:
        cardinality = None
        diagnostics["empty"] = "no grid node satisfied both equations (region too small or no solution)"
    else:
        compact = len(clusters) == 1 and cluster_diameter(pts[clusters[0]]) <= radius
        if compact:
            cardinality = Cardinality.UNIQUE
        elif len(clusters) > 1 and len(clusters_fine) == len(clusters):
            cardinality = Cardinality.FINITE_MULTIPLE
        elif growth is not None and growth >= 1.0:
            cardinality = Cardinality.CONTINUUM
        else:
            cardinality = Cardinality.FINITE_MULTIPLE
            diagnostics["ambiguous"] = "cluster structure unstable and node growth below 1"

    # every reported solution must satisfy both equations on re-evaluation
    for end in pts:
        check = equivalence_residual(geom, v, vec(q0, tuple(end)))
        if not (check <= tol):
            raise AssertionError("solver returned a point failing re-verification")

    cloud = PointCloud(
        geometry=geom, points=pts, residuals=res, region=region,
        resolution=resolution, tol=tol,
        meta={
            "equivalence_reference": {
                "origin": list(v.origin), "end": list(v.end),
                "target_origin": list(q0)},
            "nodes_scanned": base.nodes_total + fine.nodes_total,
            "inapplicable": base.inapplicable + fine.inapplicable,
        })
    return EquivalenceSolutionSet(
        reference=v, target_origin=q0, solutions=cloud, cardinality=cardinality,
        cluster_count=len(clusters), cluster_centers=centers,
        growth_exponent=growth, diagnostics=diagnostics)


@dataclass
class IntransitivityWitness:
    first: PointPairVector
    middle: PointPairVector
    last: PointPairVector
    residual_first_middle: float
    residual_middle_last: float
    residual_first_last: float


def find_intransitivity_witness(
    geom: GeometrySpec,
    v: PointPairVector,
    q0,
    r0,
    region: Region | None = None,
    resolution: float = 0.25,
    tol: float | None = None,
    *,
    budget: int = 4_000_000,
    max_middle: int = 8,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> IntransitivityWitness | None:
    """Search for vectors a eqv b, b eqv c, with a NOT eqv c.

    b ranges over the solution set of v at q0; c over solution sets of
    each b at r0.  The budget counts grid nodes evaluated; exhaustion
    returns None (no witness found, which is not a transitivity proof).
    """
    v = vec(v.origin, v.end)
    q0 = tuple(float(x) for x in q0)
    r0 = tuple(float(x) for x in r0)
    if tol is None:
        tol = resolution * (1.0 + _coord_norm(v)) / 8.0
    if v.is_zero():
        return None  # zero vectors are equivalent only to zero vectors

    spent = 0

    def scan(ref, origin, search_region):
        nonlocal spent
        nodes = search_region.node_count(resolution)
        if spent + nodes > budget:
            return None
        spent += nodes
        result = _scan_solutions(
            geom, ref, origin, search_region, resolution, tol, node_budget, workers)
        pts, _ = lex_sort(result.points, result.residuals)
        return pts

    first_region = region or default_search_region(v, q0, resolution)
    ends_b = scan(v, q0, first_region)
    if ends_b is None or len(ends_b) == 0:
        return None

    # try cluster representatives first so distinct branches get explored
    reps = [idx[0] for idx in cluster_points(ends_b, 3.0 * resolution)]
    order = reps + [i for i in range(len(ends_b)) if i not in set(reps)]
    for bi in order[:max_middle]:
        b = vec(q0, tuple(ends_b[bi]))
        if not is_equivalent(geom, v, b, tol):
            continue
        ends_c = scan(b, r0, default_search_region(b, r0, resolution))
        if ends_c is None:
            break
        for end_c in ends_c:
            c = vec(r0, tuple(end_c))
            if not is_equivalent(geom, b, c, tol):
                continue
            if not is_equivalent(geom, v, c, tol):
                return IntransitivityWitness(
                    first=v, middle=b, last=c,
                    residual_first_middle=equivalence_residual(geom, v, b),
                    residual_middle_last=equivalence_residual(geom, b, c),
                    residual_first_last=equivalence_residual(geom, v, c))
    return None
