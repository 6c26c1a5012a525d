"""Vector algebra expressed through the world function only.

A vector is an ordered pair of points.  Its length, the scalar product
of two vectors, Gram determinants over a base point and the equivalence
of two vectors are all combinations of sigma values, so they make sense
in every kernel, not only where coordinates carry meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import (
    GeometrySpec,
    IntervalClass,
    classify_interval,
    default_tol,
    sigma,
)

__all__ = [
    "Point",
    "PointPairVector",
    "vec",
    "VectorLength",
    "length",
    "pair_scalar_product",
    "scalar_product",
    "GramMatrix",
    "gram_matrix",
    "gram_determinant",
    "is_linearly_dependent",
    "equivalence_residual",
    "is_equivalent",
]

Point = tuple[float, ...]


def as_point(p) -> Point:
    return tuple(float(x) for x in p)


@dataclass(frozen=True)
class PointPairVector:
    """Ordered pair of points: origin and end."""

    origin: Point
    end: Point

    def is_zero(self) -> bool:
        return self.origin == self.end


def vec(origin, end) -> PointPairVector:
    return PointPairVector(as_point(origin), as_point(end))


@dataclass(frozen=True)
class VectorLength:
    """Magnitude sqrt(|2*sigma|); imaginary marks a negative 2*sigma."""

    value: float
    interval: IntervalClass
    imaginary: bool


def length(geom: GeometrySpec, v: PointPairVector) -> VectorLength:
    ic = classify_interval(geom, v.origin, v.end)
    if ic.two_sigma >= 0:
        return VectorLength(float(np.sqrt(ic.two_sigma)), ic, False)
    return VectorLength(float(np.sqrt(-ic.two_sigma)), ic, True)


def pair_scalar_product(geom: GeometrySpec, p0, p1, q0, q1):
    """Scalar product of (p0 -> p1) with (q0 -> q1).

    Point arguments may be arrays with a trailing coordinate axis and
    broadcast against each other.
    """
    return (
        sigma(geom, p0, q1)
        + sigma(geom, p1, q0)
        - sigma(geom, p0, q0)
        - sigma(geom, p1, q1)
    )


def scalar_product(geom: GeometrySpec, v1: PointPairVector, v2: PointPairVector) -> float:
    sp = pair_scalar_product(geom, v1.origin, v1.end, v2.origin, v2.end)
    if v1.origin == v2.origin:
        # shared-origin reduction (the cosine-law form) must agree
        alt = (
            sigma(geom, v1.origin, v2.end)
            + sigma(geom, v1.end, v1.origin)
            - sigma(geom, v1.end, v2.end)
        )
        assert abs(alt - sp) <= 1e-12 * (1.0 + abs(sp))
    return float(sp)


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise scalar products of the spoke vectors base -> spoke_i.

    entries[i, k] = sigma(base, s_i) + sigma(base, s_k) - sigma(s_i, s_k);
    the diagonal entry i equals 2*sigma(base, s_i).
    """

    base: Point
    spokes: tuple[Point, ...]
    entries: np.ndarray


def gram_matrix(geom: GeometrySpec, base, spokes) -> GramMatrix:
    base_pt = as_point(base)
    spoke_pts = tuple(as_point(s) for s in spokes)
    if not spoke_pts:
        raise ValueError("need at least one spoke")
    arr = np.asarray(spoke_pts, dtype=float)
    s0 = np.atleast_1d(np.asarray(sigma(geom, base_pt, arr), dtype=float))
    sij = np.atleast_2d(np.asarray(sigma(geom, arr[:, None, :], arr[None, :, :]), dtype=float))
    entries = s0[:, None] + s0[None, :] - sij
    return GramMatrix(base=base_pt, spokes=spoke_pts, entries=entries)


def gram_determinant(geom: GeometrySpec, base, spokes) -> float:
    """Determinant of the spoke Gram matrix; zero signals linear dependence."""
    return float(np.linalg.det(gram_matrix(geom, base, spokes).entries))


def is_linearly_dependent(geom: GeometrySpec, base, spokes, tol: float | None = None) -> bool:
    """True when the Gram determinant vanishes relative to its diagonal scale.

    The scale is the product of |diagonal| entries, which guards against
    determinants that are small only because the spokes are short.
    """
    if tol is None:
        tol = default_tol(geom)
    gm = gram_matrix(geom, base, spokes)
    det = float(np.linalg.det(gm.entries))
    scale = float(np.prod(np.abs(np.diagonal(gm.entries))))
    return abs(det) <= tol * scale


def _equivalence_terms(s1, s2, sp):
    """Elementwise residual of the two equivalence equations.

    s1, s2 are the 2*sigma of the two vectors, sp their scalar product.
    Mixed-sign pairs (s1*s2 < 0) have no defined magnitude product and
    come back as +inf (never equivalent).  Length mismatch is compared
    on magnitudes when both s are nonnegative, on 2*sigma otherwise.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    sp = np.asarray(sp, dtype=float)
    prod = s1 * s2
    with np.errstate(invalid="ignore"):
        mag = np.sqrt(np.where(prod < 0, np.nan, prod))
    r_product = np.abs(sp - mag)
    both_real = (s1 >= 0) & (s2 >= 0)
    r_length = np.where(
        both_real,
        np.abs(np.sqrt(np.clip(s1, 0.0, None)) - np.sqrt(np.clip(s2, 0.0, None))),
        np.abs(s1 - s2),
    )
    out = np.maximum(r_product, r_length)
    return np.where(np.isnan(out), np.inf, out)


def equivalence_residual(geom: GeometrySpec, v1: PointPairVector, v2: PointPairVector) -> float:
    """max of the two equivalence-equation mismatches; inf when undefined.

    A zero vector (origin == end) is equivalent only to another zero
    vector, so mixed zero/non-zero pairs return inf outright.
    """
    z1, z2 = v1.is_zero(), v2.is_zero()
    if z1 or z2:
        return 0.0 if (z1 and z2) else float("inf")
    s1 = 2.0 * sigma(geom, v1.origin, v1.end)
    s2 = 2.0 * sigma(geom, v2.origin, v2.end)
    sp = scalar_product(geom, v1, v2)
    return float(_equivalence_terms(s1, s2, sp))


def is_equivalent(
    geom: GeometrySpec, v1: PointPairVector, v2: PointPairVector, tol: float | None = None
) -> bool:
    """Equal length and scalar product equal to the product of lengths, within tol.

    tol is relative to 1 + |2*sigma| of both vectors.
    """
    if tol is None:
        tol = default_tol(geom)
    r = equivalence_residual(geom, v1, v2)
    if not np.isfinite(r):
        return False
    s1 = 2.0 * sigma(geom, v1.origin, v1.end)
    s2 = 2.0 * sigma(geom, v2.origin, v2.end)
    return r <= tol * (1.0 + abs(s1) + abs(s2))
