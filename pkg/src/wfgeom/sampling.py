"""Deterministic grid scanning, local refinement and clustering.

Scans partition the flat node index range into fixed-size chunks; chunk
boundaries do not depend on the worker count, and results are merged in
chunk order, so output is bitwise reproducible for any --workers value.
Residual callables follow one convention: finite value = defined, NaN
(or inf) = inapplicable at that probe point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "BudgetError",
    "Region",
    "ScanResult",
    "grid_scan",
    "grid_best_nodes",
    "refine_points",
    "lex_sort",
    "cluster_points",
    "cluster_diameter",
]

DEFAULT_NODE_BUDGET = 10_000_000
_CHUNK = 1 << 16


class BudgetError(RuntimeError):
    """Grid larger than the configured node budget."""


@dataclass(frozen=True)
class Region:
    """Axis-aligned box; bounds is a (lo, hi) pair per axis."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValueError("region needs at least one axis")
        for lo, hi in bounds:
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise ValueError(f"bad axis bounds {lo}:{hi}")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @classmethod
    def around(cls, center, half_width: float) -> "Region":
        h = float(half_width)
        return cls(tuple((float(c) - h, float(c) + h) for c in center))

    @classmethod
    def parse(cls, text: str) -> "Region":
        """Parse "lo:hi,lo:hi,..." (one lo:hi pair per axis)."""
        bounds = []
        for part in text.split(","):
            pieces = part.split(":")
            if len(pieces) != 2:
                raise ValueError(f"bad region axis {part!r}, expected lo:hi")
            bounds.append((float(pieces[0]), float(pieces[1])))
        return cls(tuple(bounds))

    def format(self) -> str:
        return ",".join(f"{lo:.17g}:{hi:.17g}" for lo, hi in self.bounds)

    def axes(self, resolution: float) -> list[np.ndarray]:
        if not (resolution > 0):
            raise ValueError("resolution must be positive")
        out = []
        for lo, hi in self.bounds:
            count = int(math.floor((hi - lo) / resolution * (1.0 + 1e-12) + 1e-9)) + 1
            out.append(lo + resolution * np.arange(count))
        return out

    def node_count(self, resolution: float) -> int:
        return int(np.prod([len(a) for a in self.axes(resolution)], dtype=np.int64))

    def to_json(self) -> list:
        return [[lo, hi] for lo, hi in self.bounds]


@dataclass
class ScanResult:
    points: np.ndarray     # (m, dim) accepted grid nodes
    residuals: np.ndarray  # (m,)
    nodes_total: int
    inapplicable: int


def _chunk_points(axes, shape, lo, hi) -> np.ndarray:
    idx = np.unravel_index(np.arange(lo, hi), shape)
    return np.column_stack([axes[d][idx[d]] for d in range(len(axes))])


def _resolve_workers(workers) -> int:
    if workers in (None, 0):
        import os

        return max(1, os.cpu_count() or 1)
    return max(1, int(workers))


def grid_scan(
    residual_fn,
    region: Region,
    resolution: float,
    tol: float,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> ScanResult:
    """Evaluate residual_fn on every grid node; keep |residual| <= tol.

    residual_fn maps an (m, dim) array to an (m,) array, with NaN/inf
    marking inapplicable probes (counted, never kept).
    """
    axes = region.axes(resolution)
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape, dtype=np.int64))
    if total > node_budget:
        raise BudgetError(f"grid of {total} nodes exceeds the budget of {node_budget}")
    chunks = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]

    def scan_chunk(span):
        pts = _chunk_points(axes, shape, *span)
        r = np.asarray(residual_fn(pts), dtype=float)
        finite = np.isfinite(r)
        keep = finite & (np.abs(r) <= tol)
        return pts[keep], r[keep], int(np.count_nonzero(~finite))

    n_workers = _resolve_workers(workers)
    if n_workers == 1 or len(chunks) == 1:
        parts = [scan_chunk(span) for span in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(scan_chunk, chunks))

    points = np.concatenate([p for p, _, _ in parts]) if parts else np.empty((0, region.dim))
    residuals = np.concatenate([r for _, r, _ in parts]) if parts else np.empty((0,))
    inapplicable = sum(n for _, _, n in parts)
    return ScanResult(points=points, residuals=residuals, nodes_total=total,
                      inapplicable=inapplicable)


def grid_best_nodes(
    residual_fn,
    region: Region,
    resolution: float,
    k: int,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """The k grid nodes with the smallest |residual| (ties by node order)."""
    axes = region.axes(resolution)
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape, dtype=np.int64))
    if total > node_budget:
        raise BudgetError(f"grid of {total} nodes exceeds the budget of {node_budget}")
    chunks = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]

    def scan_chunk(span):
        pts = _chunk_points(axes, shape, *span)
        r = np.asarray(residual_fn(pts), dtype=float)
        r = np.where(np.isfinite(r), np.abs(r), np.inf)
        if len(r) > k:
            best = np.argsort(r, kind="stable")[:k]
            best.sort()
            return pts[best], r[best], span[0] + best
        return pts, r, span[0] + np.arange(len(r))

    n_workers = _resolve_workers(workers)
    if n_workers == 1 or len(chunks) == 1:
        parts = [scan_chunk(span) for span in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(scan_chunk, chunks))

    pts = np.concatenate([p for p, _, _ in parts])
    res = np.concatenate([r for _, r, _ in parts])
    order = np.concatenate([o for _, _, o in parts])
    pick = np.lexsort((order, res))[:k]
    keep = np.isfinite(res[pick])
    return pts[pick][keep], res[pick][keep]


def refine_points(
    points: np.ndarray,
    residuals: np.ndarray,
    residual_fn,
    resolution: float,
    target: float,
    max_bisect: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Pull accepted nodes toward the zero level set by axis bisection.

    For each point whose |residual| exceeds target, neighbouring probes
    one grid step away along each axis are tested for a sign change of
    the (signed) residual; when one is found the bracket is bisected
    along that axis.  A point only moves when that reduces |residual|,
    so the scan's acceptance bound keeps holding.  Sign-definite
    residuals (e.g. a max of absolute mismatches) never bracket and pass
    through unchanged.  All probes are evaluated in batches.
    """
    out_p = np.array(points, dtype=float, copy=True)
    out_r = np.array(residuals, dtype=float, copy=True)
    if out_p.ndim != 2 or len(out_p) == 0:
        return out_p, out_r
    dim = out_p.shape[1]
    for axis in range(dim):
        for step in (1.0, -1.0, 2.0, -2.0):
            need = np.flatnonzero((np.abs(out_r) > target) & (out_r != 0.0))
            if len(need) == 0:
                return out_p, out_r
            probes = out_p[need].copy()
            probes[:, axis] += step * resolution
            pr = np.asarray(residual_fn(probes), dtype=float)
            # a probe already at the target counts as the far bracket side
            # (guards against sub-ulp probes landing on the near side)
            bracket = np.isfinite(pr) & (
                (np.sign(pr) != np.sign(out_r[need])) | (np.abs(pr) <= target))
            rows = need[bracket]
            if len(rows) == 0:
                continue
            a = out_p[rows].copy()
            ra = out_r[rows].copy()
            b = probes[bracket]
            rb = pr[bracket]
            for _ in range(max_bisect):
                active = np.minimum(np.abs(ra), np.abs(rb)) > target
                if not np.any(active):
                    break
                mid = a.copy()
                mid[active, axis] = 0.5 * (a[active, axis] + b[active, axis])
                rm = ra.copy()
                rm[active] = np.asarray(residual_fn(mid[active]), dtype=float)
                ok = active & np.isfinite(rm)
                same = ok & (np.sign(rm) == np.sign(ra))
                a[same], ra[same] = mid[same], rm[same]
                other = ok & ~same
                b[other], rb[other] = mid[other], rm[other]
                if not np.any(ok):
                    break
            pick_a = np.abs(ra) <= np.abs(rb)
            cand = np.where(pick_a[:, None], a, b)
            cand_r = np.where(pick_a, ra, rb)
            better = np.abs(cand_r) < np.abs(out_r[rows])
            out_p[rows[better]] = cand[better]
            out_r[rows[better]] = cand_r[better]
    return out_p, out_r


def lex_sort(points: np.ndarray, *companions: np.ndarray):
    """Order rows lexicographically (first coordinate most significant)."""
    if len(points) == 0:
        return (points, *companions)
    order = np.lexsort(points.T[::-1])
    return (points[order], *(c[order] for c in companions))


def cluster_points(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Connected components under the linking radius (coordinate metric).

    Components come back ordered by their smallest member index, so
    lexicographically pre-sorted input gives a deterministic clustering.
    """
    n = len(points)
    if n == 0:
        return []
    parent = np.arange(n)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs):
        for a, b in pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    clusters = []
    for root in np.unique(roots):
        clusters.append(np.flatnonzero(roots == root))
    clusters.sort(key=lambda idx: int(idx[0]))
    return clusters


def cluster_diameter(points: np.ndarray, limit: int = 4000) -> float:
    """Max pairwise coordinate distance; bbox diagonal above the size limit."""
    m = len(points)
    if m <= 1:
        return 0.0
    if m > limit:
        span = points.max(axis=0) - points.min(axis=0)
        return float(np.sqrt(np.sum(span * span)))
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))
