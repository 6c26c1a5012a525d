"""Geometry kernels driven by a two-point world function.

A geometry is specified entirely by its world function sigma(P, Q),
i.e. half of the squared distance between two points.  Points are plain
coordinate tuples used as labels into the kernel; every geometric
statement the rest of the package makes is expressed through sigma
alone.  Supported kernels: proper Euclidean, Minkowski space-time,
Minkowski with a constant sign-deformation, and a tabulated kernel fed
from an explicit symmetric matrix (used mainly to audit adversarial
distance data).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "GeometryError",
    "InapplicablePointError",
    "Kind",
    "GeometrySpec",
    "euclidean",
    "minkowski",
    "deformed_minkowski",
    "tabulated",
    "IntervalKind",
    "IntervalClass",
    "sigma",
    "classify_interval",
    "default_tol",
    "AxiomCheck",
    "AxiomReport",
    "audit_metric_axioms",
    "audit_world_function_axioms",
]


class GeometryError(ValueError):
    """Bad geometry definition, or a point that does not fit it."""


class InapplicablePointError(GeometryError):
    """Raised where a required real distance does not exist (2*sigma < 0)."""


class Kind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    MINKOWSKI = "minkowski"
    DEFORMED_MINKOWSKI = "deformed_minkowski"
    TABULATED = "tabulated"


_MINKOWSKI_KINDS = (Kind.MINKOWSKI, Kind.DEFORMED_MINKOWSKI)


@dataclass(frozen=True)
class GeometrySpec:
    """Immutable kernel description; safe to share across workers.

    dim is the arity of the coordinate labels.  light_speed applies to
    the Minkowski kinds only, deformation to the deformed kind only and
    table to the tabulated kind only (square, symmetric, zero diagonal,
    holding sigma values over an enumerated point set).
    """

    kind: Kind
    dim: int
    light_speed: float = 1.0
    deformation: float = 0.0
    table: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if int(self.dim) != self.dim or self.dim < 1:
            raise GeometryError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if kind in _MINKOWSKI_KINDS:
            if not (self.light_speed > 0):
                raise GeometryError("light_speed must be positive")
            if self.dim < 2:
                raise GeometryError("Minkowski kinds need dim >= 2 (time plus space)")
        if kind is Kind.DEFORMED_MINKOWSKI and not (self.deformation >= 0):
            raise GeometryError("deformation must be >= 0")
        if kind is Kind.TABULATED:
            if self.table is None:
                raise GeometryError("tabulated kind needs a table")
            tab = tuple(tuple(float(v) for v in row) for row in self.table)
            object.__setattr__(self, "table", tab)
            n = len(tab)
            if n == 0 or any(len(row) != n for row in tab):
                raise GeometryError("table must be a non-empty square matrix")
            arr = np.asarray(tab, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise GeometryError("table entries must be finite")
            if not np.array_equal(arr, arr.T):
                raise GeometryError("table must be symmetric")
            if np.any(np.diagonal(arr) != 0.0):
                raise GeometryError("table diagonal must be zero")
            if self.dim != 1:
                raise GeometryError("tabulated kind uses dim=1 index labels")
        elif self.table is not None:
            raise GeometryError(f"table is only valid for the tabulated kind, not {kind.value}")

    @property
    def table_size(self) -> int:
        return 0 if self.table is None else len(self.table)

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "dim": self.dim}
        if self.kind in _MINKOWSKI_KINDS:
            out["c"] = float(self.light_speed)
        if self.kind is Kind.DEFORMED_MINKOWSKI:
            out["d"] = float(self.deformation)
        if self.kind is Kind.TABULATED:
            out["table"] = [list(row) for row in self.table]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "GeometrySpec":
        """Parse the fixed JSON schema; unknown or misplaced fields are rejected."""
        if not isinstance(data, dict):
            raise GeometryError("geometry spec must be a JSON object")
        try:
            kind = Kind(data.get("kind"))
        except ValueError:
            raise GeometryError(f"unknown geometry kind: {data.get('kind')!r}") from None
        allowed = {"kind", "dim"}
        if kind in _MINKOWSKI_KINDS:
            allowed.add("c")
        if kind is Kind.DEFORMED_MINKOWSKI:
            allowed.add("d")
        if kind is Kind.TABULATED:
            allowed.add("table")
        extra = set(data) - allowed
        if extra:
            raise GeometryError(f"unexpected fields for kind {kind.value}: {sorted(extra)}")
        if kind is Kind.TABULATED:
            return cls(kind=kind, dim=int(data.get("dim", 1)), table=tuple(
                tuple(row) for row in data.get("table", ())))
        if "dim" not in data:
            raise GeometryError("geometry spec needs a dim field")
        kwargs: dict = {"kind": kind, "dim": data["dim"]}
        if kind in _MINKOWSKI_KINDS:
            if "c" not in data:
                raise GeometryError("Minkowski kinds need a c field")
            kwargs["light_speed"] = float(data["c"])
        if kind is Kind.DEFORMED_MINKOWSKI:
            if "d" not in data:
                raise GeometryError("deformed Minkowski needs a d field")
            kwargs["deformation"] = float(data["d"])
        return cls(**kwargs)


def euclidean(dim: int) -> GeometrySpec:
    return GeometrySpec(kind=Kind.EUCLIDEAN, dim=dim)


def minkowski(dim: int = 4, c: float = 1.0) -> GeometrySpec:
    return GeometrySpec(kind=Kind.MINKOWSKI, dim=dim, light_speed=c)


def deformed_minkowski(dim: int = 4, c: float = 1.0, d: float = 0.1) -> GeometrySpec:
    return GeometrySpec(kind=Kind.DEFORMED_MINKOWSKI, dim=dim, light_speed=c, deformation=d)


def tabulated(table) -> GeometrySpec:
    return GeometrySpec(kind=Kind.TABULATED, dim=1, table=tuple(tuple(row) for row in table))


def default_tol(geom: GeometrySpec) -> float:
    """Default relative tolerance: tight for the Euclidean kernel, looser otherwise."""
    return 1e-9 if geom.kind is Kind.EUCLIDEAN else 1e-7


def _coords(geom: GeometrySpec, pts) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim == 0 or a.shape[-1] != geom.dim:
        raise GeometryError(
            f"point arity mismatch: geometry has dim {geom.dim}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GeometryError("point coordinates must be finite")
    return a


def _indices(geom: GeometrySpec, pts) -> np.ndarray:
    a = _coords(geom, pts)[..., 0]
    idx = np.rint(a)
    if np.any(idx != a):
        raise GeometryError("tabulated points must be integer indices")
    n = geom.table_size
    if np.any(idx < 0) or np.any(idx >= n):
        raise GeometryError(f"tabulated index out of range 0..{n - 1}")
    return idx.astype(np.intp)


def sigma(geom: GeometrySpec, p, q):
    """World function of the pair (p, q).

    Accepts single points or arrays of points with a trailing coordinate
    axis; inputs broadcast against each other.  Returns a float for two
    single points, otherwise an ndarray.  Symmetric and exactly zero on
    the diagonal for every kind.
    """
    if geom.kind is Kind.TABULATED:
        i, j = np.broadcast_arrays(_indices(geom, p), _indices(geom, q))
        table = np.asarray(geom.table, dtype=float)
        out = table[i, j]
    else:
        a = _coords(geom, p)
        b = _coords(geom, q)
        d = a - b
        if geom.kind is Kind.EUCLIDEAN:
            out = 0.5 * np.sum(d * d, axis=-1)
        else:
            c2 = geom.light_speed * geom.light_speed
            out = 0.5 * (c2 * d[..., 0] * d[..., 0] - np.sum(d[..., 1:] * d[..., 1:], axis=-1))
            if geom.kind is Kind.DEFORMED_MINKOWSKI:
                out = out + geom.deformation * np.sign(out)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


class IntervalKind(str, enum.Enum):
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"
    NULL = "null"


@dataclass(frozen=True)
class IntervalClass:
    """Sign class of an interval, with the signed value of 2*sigma."""

    kind: IntervalKind
    two_sigma: float


def classify_interval(geom: GeometrySpec, p, q, null_tol: float = 1e-12) -> IntervalClass:
    """Classify the pair by the sign of 2*sigma.

    null_tol scales relatively: |2*sigma| <= null_tol*(1+|2*sigma|)
    counts as null.  Stable under swapping p and q.
    """
    s2 = 2.0 * sigma(geom, p, q)
    if abs(s2) <= null_tol * (1.0 + abs(s2)):
        return IntervalClass(IntervalKind.NULL, s2)
    if s2 > 0:
        return IntervalClass(IntervalKind.TIMELIKE, s2)
    return IntervalClass(IntervalKind.SPACELIKE, s2)


# ---------------------------------------------------------------------------
# axiom audits


@dataclass
class AxiomCheck:
    """Outcome of one audited axiom over a point sample.

    witnesses hold up to max_witnesses counterexamples, each a tuple of
    the points involved plus the offending residual; violations are
    data, never exceptions.
    """

    axiom: str
    passed: bool
    checked: int
    inapplicable: int
    witnesses: list
    worst_residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "passed": self.passed,
            "checked": self.checked,
            "inapplicable": self.inapplicable,
            "worst_residual": self.worst_residual,
            "witnesses": [
                {"points": [list(p) for p in w[:-1]], "residual": w[-1]} for w in self.witnesses
            ],
        }


@dataclass
class AxiomReport:
    geometry: GeometrySpec
    audit: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, axiom: str) -> AxiomCheck:
        for c in self.checks:
            if c.axiom == axiom:
                return c
        raise KeyError(axiom)

    def to_dict(self) -> dict:
        return {
            "audit": self.audit,
            "geometry": self.geometry.to_json_dict(),
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_text(self) -> str:
        lines = [f"audit={self.audit} passed={str(self.passed).lower()}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = ""
            if c.worst_residual is not None:
                extra = f" worst_residual={c.worst_residual:.9g}"
            lines.append(
                f"  {status} {c.axiom} checked={c.checked}"
                f" inapplicable={c.inapplicable} witnesses={len(c.witnesses)}{extra}")
        return "\n".join(lines)


_MAX_WITNESSES = 16


def _pair_matrix(geom: GeometrySpec, sample) -> tuple[list, np.ndarray]:
    pts = [tuple(float(x) for x in p) for p in sample]
    if not pts:
        raise GeometryError("sample must be non-empty")
    arr = np.asarray(pts, dtype=float)
    s2 = 2.0 * np.asarray(sigma(geom, arr[:, None, :], arr[None, :, :]), dtype=float)
    return pts, np.atleast_2d(s2)


def audit_metric_axioms(geom: GeometrySpec, sample, tol: float = 1e-9) -> AxiomReport:
    """Audit the classical distance axioms on a finite sample.

    Checks, with rho = sqrt(2*sigma): existence of a nonnegative
    symmetric distance, identity of indiscernibles, and the triangle
    inequality over all ordered triples.  A triangle witness (P, Q, R)
    records rho(P,R) + rho(R,Q) < rho(P,Q), i.e. R is the failing
    intermediate point for the far pair (P, Q).
    """
    pts, s2 = _pair_matrix(geom, sample)
    m = len(pts)

    # distance exists: 2*sigma >= 0 and symmetric
    wit = []
    worst = None
    for i in range(m):
        for j in range(i + 1, m):
            if s2[i, j] < -tol * (1.0 + abs(s2[i, j])):
                wit.append((pts[i], pts[j], s2[i, j]))
                worst = s2[i, j] if worst is None else min(worst, s2[i, j])
    sym_ok = np.array_equal(s2, s2.T)
    if not sym_ok:
        bad = np.argwhere(s2 != s2.T)
        i, j = bad[0]
        wit.append((pts[i], pts[j], float(s2[i, j] - s2[j, i])))
    nonneg = AxiomCheck(
        axiom="nonnegative_symmetric_distance",
        passed=not wit,
        checked=m * (m - 1) // 2,
        inapplicable=0,
        witnesses=wit[:_MAX_WITNESSES],
        worst_residual=worst,
    )

    # identity of indiscernibles: rho(P,Q) = 0 exactly when P = Q
    wit = []
    worst = None
    for i in range(m):
        if s2[i, i] != 0.0:
            wit.append((pts[i], pts[i], s2[i, i]))
    for i in range(m):
        for j in range(i + 1, m):
            if pts[i] != pts[j] and abs(s2[i, j]) <= tol * (1.0 + abs(s2[i, j])):
                wit.append((pts[i], pts[j], s2[i, j]))
                worst = s2[i, j] if worst is None else worst
    identity = AxiomCheck(
        axiom="identity_of_indiscernibles",
        passed=not wit,
        checked=m * (m + 1) // 2,
        inapplicable=0,
        witnesses=wit[:_MAX_WITNESSES],
        worst_residual=worst,
    )

    # triangle inequality over ordered triples of distinct sample slots
    ok_pair = s2 >= -tol * (1.0 + np.abs(s2))
    rho = np.sqrt(np.maximum(s2, 0.0))
    t = rho[:, None, :] + rho.T[None, :, :] - rho[:, :, None]  # [i,j,k]: via k vs direct i->j
    applicable = ok_pair[:, None, :] & ok_pair.T[None, :, :] & ok_pair[:, :, None]
    distinct = np.ones((m, m, m), dtype=bool)
    idx = np.arange(m)
    distinct[idx, idx, :] = False
    distinct[idx, :, idx] = False
    distinct[:, idx, idx] = False
    scale = 1.0 + rho[:, :, None]
    viol = distinct & applicable & (t < -tol * scale)
    n_applicable = int(np.count_nonzero(distinct & applicable))
    n_inapplicable = int(np.count_nonzero(distinct & ~applicable))
    wit = []
    worst = None
    if np.any(viol):
        order = np.argwhere(viol)
        residuals = t[viol]
        worst = float(residuals.min())
        for (i, j, k) in order[:_MAX_WITNESSES]:
            wit.append((pts[i], pts[j], pts[k], float(t[i, j, k])))
    triangle = AxiomCheck(
        axiom="triangle_inequality",
        passed=not wit,
        checked=n_applicable,
        inapplicable=n_inapplicable,
        witnesses=wit,
        worst_residual=worst,
    )

    return AxiomReport(geometry=geom, audit="metric", checks=[nonneg, identity, triangle])


def audit_world_function_axioms(geom: GeometrySpec, sample, tol: float = 1e-9) -> AxiomReport:
    """Audit the world-function conditions on a finite sample.

    The zero-diagonal/symmetry condition is checked exactly.  The
    reversed triangle inequality sqrt(2s(P,Q)) + sqrt(2s(P,R)) <=
    sqrt(2s(R,Q)) carries an existential reading per unordered triple:
    the triple passes when some assignment of the middle point P with
    2s(R,Q) > 0 and both left radicands >= 0 satisfies it within tol.
    Assignments with a negative radicand are inapplicable rather than
    failed; a triple with no applicable assignment is skipped.
    """
    pts, s2 = _pair_matrix(geom, sample)
    m = len(pts)

    wit = []
    for i in range(m):
        if s2[i, i] != 0.0:
            wit.append((pts[i], pts[i], s2[i, i]))
    if not np.array_equal(s2, s2.T):
        bad = np.argwhere(s2 != s2.T)
        i, j = bad[0]
        wit.append((pts[i], pts[j], float(s2[i, j] - s2[j, i])))
    exact = AxiomCheck(
        axiom="symmetric_zero_diagonal",
        passed=not wit,
        checked=m * m,
        inapplicable=0,
        witnesses=wit[:_MAX_WITNESSES],
    )

    rho = np.sqrt(np.maximum(s2, 0.0))
    wit = []
    worst = None
    n_checked = 0
    n_inapplicable = 0
    for (i, j, k) in combinations(range(m), 3):
        best = None
        best_assign = None
        for p, q, r in ((i, j, k), (j, i, k), (k, i, j)):
            if s2[r, q] <= 0 or s2[p, q] < 0 or s2[p, r] < 0:
                continue
            resid = (rho[p, q] + rho[p, r] - rho[r, q]) / (1.0 + rho[r, q])
            if best is None or resid < best:
                best = resid
                best_assign = (p, q, r)
        if best is None:
            n_inapplicable += 1
            continue
        n_checked += 1
        if best > tol:
            p, q, r = best_assign
            wit.append((pts[p], pts[q], pts[r], float(best)))
            worst = best if worst is None else max(worst, best)
    reversed_triangle = AxiomCheck(
        axiom="reversed_triangle_inequality",
        passed=not wit,
        checked=n_checked,
        inapplicable=n_inapplicable,
        witnesses=wit[:_MAX_WITNESSES],
        worst_residual=worst,
    )

    return AxiomReport(
        geometry=geom, audit="world_function", checks=[exact, reversed_triangle])
