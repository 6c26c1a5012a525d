"""Audit whether a world function describes n-dimensional proper Euclidean geometry.

Four conditions are checked on a finite candidate sample, all expressed
through the world function:

  dimension         some n+1 points span a nondegenerate Gram matrix
                    while every sampled larger tuple degenerates
  linear_structure  sigma(P,Q) equals the quadratic form of covariant
                    coordinate differences in the detected basis
  positivity        the metric tensor has only positive eigenvalues
  continuity        the covariant-coordinate system has exactly one
                    solution point for every coordinate tuple

All four passing at the same detected dimension is necessary and
sufficient for the geometry to be proper Euclidean of that dimension;
each single failure pinpoints what breaks (indefinite metric for
Minkowski-like kernels, broken linear structure for deformed ones).
The universal quantifiers are sampled, not proved: the report states
how many tuples were drawn.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jsonio import write_path as _write_json
from .kernel import GeometryError, GeometrySpec, Kind, sigma
from .sampling import (
    DEFAULT_NODE_BUDGET,
    Region,
    cluster_points,
    grid_best_nodes,
    lex_sort,
)
from .vectors import Point, as_point, gram_matrix

__all__ = [
    "jacobi_eigenvalues",
    "MetricTensor",
    "build_metric_tensor",
    "DimensionResult",
    "detect_dimension",
    "ConditionResult",
    "check_rank_collapse",
    "check_linear_structure",
    "check_positivity",
    "check_continuity",
    "covariant_coordinates",
    "EuclideanessConfig",
    "EuclideanessReport",
    "full_report",
]


def jacobi_eigenvalues(matrix, off_tol: float = 1e-10, max_sweeps: int = 64) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm drops below off_tol
    relative to the matrix norm.  Returns eigenvalues sorted descending.
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, atol=0, rtol=0):
        if not np.array_equal(a, a.T):
            raise ValueError("matrix must be symmetric")
    norm = max(1.0, float(np.sqrt(np.sum(a * a))))
    for _ in range(max_sweeps):
        off = np.sqrt(max(float(np.sum(a * a) - np.sum(np.diagonal(a) ** 2)), 0.0))
        if off <= off_tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c = np.cos(theta)
                s = np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diagonal(a))[::-1]


@dataclass
class MetricTensor:
    """Metric tensor of the rectilinear frame spanned by base -> spoke vectors."""

    base: Point
    spokes: tuple[Point, ...]
    g_lower: np.ndarray
    g_upper: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.spokes)


def build_metric_tensor(geom: GeometrySpec, base, spokes, tol: float = 1e-12) -> MetricTensor:
    """g[i, l] = scalar product of the spoke vectors; inverse and spectrum included."""
    gm = gram_matrix(geom, base, spokes)
    g = gm.entries
    det = float(np.linalg.det(g))
    scale = float(np.prod(np.maximum(np.abs(np.diagonal(g)), 1e-300)))
    if abs(det) <= tol * scale:
        raise GeometryError("degenerate basis: the spoke Gram matrix is singular")
    return MetricTensor(
        base=gm.base,
        spokes=gm.spokes,
        g_lower=g,
        g_upper=np.linalg.inv(g),
        eigenvalues=jacobi_eigenvalues(g),
    )


def covariant_coordinates(geom: GeometrySpec, base, spokes, p) -> tuple:
    """x_i(p) = (base -> spoke_i) . (base -> p) for each spoke."""
    row = covariant_batch(geom, base, spokes, np.asarray(as_point(p))[None, :])[0]
    return tuple(float(x) for x in row)


def covariant_batch(geom: GeometrySpec, base, spokes, pts: np.ndarray) -> np.ndarray:
    """Covariant coordinates of many points, shape (m, n_spokes)."""
    base = np.asarray(as_point(base), dtype=float)
    pts = np.asarray(pts, dtype=float)
    s_base = np.asarray(sigma(geom, base, pts), dtype=float)
    cols = []
    for sp in spokes:
        sp = np.asarray(as_point(sp), dtype=float)
        cols.append(
            s_base
            + float(sigma(geom, sp, base))
            - np.asarray(sigma(geom, sp, pts), dtype=float))
    return np.stack(cols, axis=-1)


@dataclass
class DimensionResult:
    dim: int | None
    base: Point | None
    spokes: tuple[Point, ...]
    gram_ratio: float  # |det| / product of |diagonal| for the witness


def _gram_ratio(geom, base, spokes) -> float:
    g = gram_matrix(geom, base, spokes).entries
    scale = float(np.prod(np.abs(np.diagonal(g))))
    if scale == 0.0:
        return 0.0
    return abs(float(np.linalg.det(g))) / scale


def detect_dimension(
    geom: GeometrySpec,
    candidates,
    tol: float = 1e-7,
    max_dim: int | None = None,
) -> DimensionResult:
    """Greedy search for the largest nondegenerate spoke tuple.

    Starting from each candidate base in turn, spokes are added greedily
    by the Gram ratio |det|/prod|diag| until no candidate keeps it above
    tol or max_dim spokes are reached.  max_dim defaults to the label
    arity (candidate count - 1 for tabulated kernels).
    """
    pts = [as_point(p) for p in candidates]
    if len(pts) < 2:
        raise GeometryError("need at least two candidate points")
    if max_dim is None:
        max_dim = (len(pts) - 1) if geom.kind is Kind.TABULATED else geom.dim
    max_dim = min(max_dim, len(pts) - 1)

    for base_idx, base in enumerate(pts):
        others = [p for i, p in enumerate(pts) if i != base_idx]
        spokes: list[Point] = []
        ratio = 0.0
        while len(spokes) < max_dim:
            best = None
            best_ratio = tol
            for cand in others:
                if cand in spokes:
                    continue
                r = _gram_ratio(geom, base, spokes + [cand])
                if r > best_ratio:
                    best, best_ratio = cand, r
            if best is None:
                break
            spokes.append(best)
            ratio = best_ratio
        if spokes:
            return DimensionResult(dim=len(spokes), base=base, spokes=tuple(spokes),
                                   gram_ratio=ratio)
    return DimensionResult(dim=None, base=None, spokes=(), gram_ratio=0.0)


@dataclass
class ConditionResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "details": self.details}


def check_rank_collapse(
    geom: GeometrySpec,
    candidates,
    dim: int,
    tol: float = 1e-7,
    n_samples: int = 200,
    seed: int = 0,
) -> ConditionResult:
    """Sampled check that every (dim+2)-tuple of candidates is degenerate."""
    pts = [as_point(p) for p in candidates]
    rng = np.random.default_rng(seed)
    need = dim + 2
    worst = 0.0
    worst_tuple = None
    checked = 0
    if len(pts) >= need:
        for _ in range(n_samples):
            pick = rng.choice(len(pts), size=need, replace=False)
            base, spokes = pts[pick[0]], [pts[i] for i in pick[1:]]
            r = _gram_ratio(geom, base, spokes)
            checked += 1
            if r > worst:
                worst = r
                worst_tuple = [list(pts[i]) for i in pick]
    passed = worst <= tol
    details = {"samples": checked, "worst_ratio": worst, "tol": tol}
    if worst_tuple is not None and not passed:
        details["witness_tuple"] = worst_tuple
    return ConditionResult(name="dimension", passed=passed, details=details)


def check_linear_structure(
    geom: GeometrySpec,
    mt: MetricTensor,
    pairs,
    tol: float = 1e-7,
) -> ConditionResult:
    """Compare sigma(P,Q) with the quadratic form of covariant differences."""
    worst = 0.0
    worst_rel = 0.0
    worst_pair = None
    for p, q in pairs:
        p, q = as_point(p), as_point(q)
        xp = np.asarray(covariant_coordinates(geom, mt.base, mt.spokes, p))
        xq = np.asarray(covariant_coordinates(geom, mt.base, mt.spokes, q))
        dx = xp - xq
        quad = 0.5 * float(dx @ mt.g_upper @ dx)
        s = float(sigma(geom, p, q))
        resid = abs(s - quad)
        rel = resid / (1.0 + abs(s))
        if rel > worst_rel:
            worst, worst_rel, worst_pair = resid, rel, (p, q)
    passed = worst_rel <= tol
    details = {"pairs": len(list(pairs)), "worst_residual": worst,
               "worst_relative": worst_rel, "tol": tol}
    if worst_pair is not None:
        details["worst_pair"] = [list(worst_pair[0]), list(worst_pair[1])]
    return ConditionResult(name="linear_structure", passed=passed, details=details)


def check_positivity(mt: MetricTensor, tol: float = 1e-9) -> ConditionResult:
    """All metric-tensor eigenvalues strictly positive."""
    eig = np.asarray(mt.eigenvalues, dtype=float)
    scale = max(1.0, float(np.max(np.abs(eig))))
    passed = bool(np.min(eig) > tol * scale)
    return ConditionResult(
        name="positivity",
        passed=passed,
        details={"eigenvalues": list(eig), "min_eigenvalue": float(np.min(eig)), "tol": tol},
    )


def _newton_polish(residual_vec, x0, iters: int = 25):
    """Damped Newton on a small square system with finite-difference Jacobian."""
    x = np.array(x0, dtype=float)
    f = residual_vec(x)
    for _ in range(iters):
        fn_norm = float(np.max(np.abs(f)))
        if fn_norm == 0.0:
            break
        h = 1e-6 * (1.0 + np.abs(x))
        jac = np.empty((len(f), len(x)))
        for d in range(len(x)):
            xp = x.copy()
            xp[d] += h[d]
            jac[:, d] = (residual_vec(xp) - f) / h[d]
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, f, rcond=None)[0]
        moved = False
        t = 1.0
        for _ in range(8):
            xn = x - t * step
            fn = residual_vec(xn)
            if float(np.max(np.abs(fn))) < fn_norm:
                x, f = xn, fn
                moved = True
                break
            t *= 0.5
        if not moved:
            break
    return x, float(np.max(np.abs(f)))


def check_continuity(
    geom: GeometrySpec,
    mt: MetricTensor,
    y_samples,
    region: Region,
    resolution: float,
    *,
    strict_tol: float = 1e-6,
    n_seeds: int = 48,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> ConditionResult:
    """Each coordinate tuple y must determine exactly one solution point.

    For every y the grid provides the best seed nodes of the system
    x_i(P) = y_i; each seed is polished by damped Newton and counted as
    a solution when its residual drops below strict_tol (tabulated
    kernels skip polishing since their points are discrete).  Exactly
    one solution cluster per y passes; zero or several is a witness.
    """
    witnesses = []
    counts = []
    inconclusive = 0
    for y in y_samples:
        y = np.asarray(y, dtype=float)
        scale = 1.0 + float(np.max(np.abs(y)))

        def node_residual(pts, y=y):
            return np.max(np.abs(covariant_batch(geom, mt.base, mt.spokes, pts) - y), axis=-1)

        try:
            seeds, seed_res = grid_best_nodes(
                node_residual, region, resolution, n_seeds,
                node_budget=node_budget, workers=workers)
        except Exception:
            inconclusive += 1
            counts.append(None)
            continue

        solutions = []
        if geom.kind is Kind.TABULATED:
            for p, r in zip(seeds, seed_res):
                if r <= strict_tol * scale:
                    solutions.append(p)
        else:
            def vec_residual(x, y=y):
                return covariant_batch(geom, mt.base, mt.spokes, x[None, :])[0] - y

            for p in seeds:
                sol, resid = _newton_polish(vec_residual, p)
                if resid <= strict_tol * scale:
                    solutions.append(sol)
        if solutions:
            pts = np.asarray(solutions)
            pts, = lex_sort(pts)
            clusters = cluster_points(pts, 0.5 * resolution)
            n_clusters = len(clusters)
        else:
            n_clusters = 0
        counts.append(n_clusters)
        if n_clusters != 1:
            witnesses.append({"y": list(y), "solution_clusters": n_clusters})
    passed = not witnesses and inconclusive == 0
    return ConditionResult(
        name="continuity",
        passed=passed,
        details={
            "y_count": len(counts),
            "solution_counts": counts,
            "inconclusive": inconclusive,
            "witnesses": witnesses[:8],
            "strict_tol": strict_tol,
        },
    )


@dataclass
class EuclideanessConfig:
    tol_dimension: float = 1e-7
    rank_samples: int = 200
    tol_linear: float = 1e-7
    tol_positivity: float = 1e-9
    strict_continuity_tol: float = 1e-6
    n_pairs: int = 60
    y_samples: int = 5
    y_perturbation: float = 0.05
    continuity_region: Region | None = None
    continuity_resolution: float | None = None
    pairs: list | None = None
    max_dim: int | None = None
    seed: int = 0
    node_budget: int = DEFAULT_NODE_BUDGET
    workers: int = 1


@dataclass
class EuclideanessReport:
    geometry: GeometrySpec
    detected_dim: int | None
    conditions: dict
    verdict: bool
    basis: dict

    def condition(self, name: str) -> ConditionResult:
        return self.conditions[name]

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.to_json_dict(),
            "detected_dim": self.detected_dim,
            "verdict": self.verdict,
            "basis": self.basis,
            "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
        }

    def write_json(self, path) -> None:
        _write_json(self.to_dict(), path)

    def to_text(self) -> str:
        lines = [
            f"verdict={'euclidean' if self.verdict else 'not-euclidean'}"
            f" detected_dim={self.detected_dim}"
        ]
        for name in ("dimension", "linear_structure", "positivity", "continuity"):
            cond = self.conditions.get(name)
            if cond is None:
                lines.append(f"  SKIP {name}")
                continue
            status = "PASS" if cond.passed else "FAIL"
            note = ""
            if name == "positivity" and "min_eigenvalue" in cond.details:
                note = f" min_eigenvalue={cond.details['min_eigenvalue']:.9g}"
            if name == "linear_structure" and "worst_residual" in cond.details:
                note = f" worst_residual={cond.details['worst_residual']:.9g}"
            if name == "continuity" and cond.details.get("witnesses"):
                note = f" witnesses={len(cond.details['witnesses'])}"
            lines.append(f"  {status} {name}{note}")
        return "\n".join(lines)


def _default_pairs(candidates, n_pairs, rng):
    pts = [as_point(p) for p in candidates]
    pairs = []
    for _ in range(n_pairs):
        i, j = rng.choice(len(pts), size=2, replace=False)
        pairs.append((pts[i], pts[j]))
    return pairs


def _default_continuity_region(candidates) -> Region:
    arr = np.asarray([as_point(p) for p in candidates], dtype=float)
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    margin = 0.25 * np.maximum(hi - lo, 1.0)
    return Region(tuple((float(a - m), float(b + m)) for a, b, m in zip(lo, hi, margin)))


def full_report(
    geom: GeometrySpec,
    candidates,
    config: EuclideanessConfig | None = None,
) -> EuclideanessReport:
    """Run the four conditions in order at the detected dimension."""
    cfg = config or EuclideanessConfig()
    rng = np.random.default_rng(cfg.seed)
    conditions: dict = {}

    dim_res = detect_dimension(geom, candidates, tol=cfg.tol_dimension, max_dim=cfg.max_dim)
    if dim_res.dim is None:
        conditions["dimension"] = ConditionResult(
            name="dimension", passed=False,
            details={"error": "no nondegenerate point pair among the candidates"})
        return EuclideanessReport(
            geometry=geom, detected_dim=None, conditions=conditions,
            verdict=False, basis={})

    rank = check_rank_collapse(
        geom, candidates, dim_res.dim, tol=cfg.tol_dimension,
        n_samples=cfg.rank_samples, seed=cfg.seed)
    rank.details["detected_dim"] = dim_res.dim
    rank.details["witness_base"] = list(dim_res.base)
    rank.details["witness_spokes"] = [list(s) for s in dim_res.spokes]
    rank.details["witness_gram_ratio"] = dim_res.gram_ratio
    conditions["dimension"] = rank

    mt = build_metric_tensor(geom, dim_res.base, dim_res.spokes)

    pairs = cfg.pairs if cfg.pairs is not None else _default_pairs(
        candidates, cfg.n_pairs, rng)
    conditions["linear_structure"] = check_linear_structure(
        geom, mt, pairs, tol=cfg.tol_linear)

    conditions["positivity"] = check_positivity(mt, tol=cfg.tol_positivity)

    if geom.kind is Kind.TABULATED:
        region = Region(((0.0, float(geom.table_size - 1)),))
        resolution = 1.0
    else:
        region = cfg.continuity_region or _default_continuity_region(candidates)
        resolution = cfg.continuity_resolution or max(
            (hi - lo) for lo, hi in region.bounds) / 8.0
    pts = [as_point(p) for p in candidates]
    ys = []
    for _ in range(cfg.y_samples):
        p = pts[int(rng.integers(len(pts)))]
        y = np.asarray(covariant_coordinates(geom, mt.base, mt.spokes, p), dtype=float)
        bump = rng.uniform(-cfg.y_perturbation, cfg.y_perturbation, size=y.shape)
        ys.append(y + bump * (1.0 + np.abs(y)))
    conditions["continuity"] = check_continuity(
        geom, mt, ys, region, resolution,
        strict_tol=cfg.strict_continuity_tol,
        node_budget=cfg.node_budget, workers=cfg.workers)

    verdict = all(c.passed for c in conditions.values())
    basis = {"base": list(mt.base), "spokes": [list(s) for s in mt.spokes]}
    return EuclideanessReport(
        geometry=geom, detected_dim=dim_res.dim, conditions=conditions,
        verdict=verdict, basis=basis)
