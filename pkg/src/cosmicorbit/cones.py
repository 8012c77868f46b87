"""Cone calculus.

Planar closed convex cones are stored in angular form, which makes polars,
intersections and the ray / subspace predicates exact up to an angular
tolerance.  Recession cones of H-polyhedra are available in any dimension.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, EmptySet, UnsupportedDimension
from .vecgeo import as_vector

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12
MAX_ROWS_2D = 12

ZERO, RAY, LINE, SECTOR, PLANE = "zero", "ray", "line", "sector", "plane"


def canonical_angle(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI - ANGLE_TOL:
        t = 0.0
    return t


def angle_of(d) -> float:
    d = as_vector(d, 2)
    if not np.any(d):
        raise DomainError("zero vector has no angle")
    return canonical_angle(math.atan2(d[1], d[0]))


def unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def _angle_gap(a: float, b: float) -> float:
    """Circular distance between two angles, in [0, pi]."""
    d = abs(canonical_angle(a) - canonical_angle(b))
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class PolyhedralCone2D:
    """Closed convex cone in the plane.

    ``kind`` is one of ``zero``, ``ray``, ``line``, ``sector`` or ``plane``.
    A ray sits at angle ``start``; a line is stored through its representer
    angle in ``[0, pi)``; a sector covers ``[start, start + width]`` with
    ``0 < width <= pi`` (``width == pi`` is a halfplane).
    """

    kind: str
    start: float = 0.0
    width: float = 0.0

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls(ZERO)

    @classmethod
    def plane(cls):
        return cls(PLANE, 0.0, TWO_PI)

    @classmethod
    def ray(cls, d):
        return cls(RAY, angle_of(d))

    @classmethod
    def ray_at(cls, theta: float):
        return cls(RAY, canonical_angle(theta))

    @classmethod
    def line(cls, d):
        return cls.line_at(angle_of(d))

    @classmethod
    def line_at(cls, theta: float):
        t = math.fmod(canonical_angle(theta), math.pi)
        if t >= math.pi - ANGLE_TOL:
            t = 0.0
        return cls(LINE, t)

    @classmethod
    def sector(cls, start: float, width: float):
        if width <= ANGLE_TOL:
            return cls.ray_at(start)
        if width >= TWO_PI - ANGLE_TOL:
            return cls.plane()
        if width > math.pi + ANGLE_TOL:
            raise DomainError(f"sector of width {width!r} > pi is not convex")
        return cls(SECTOR, canonical_angle(start), min(width, math.pi))

    @classmethod
    def halfplane(cls, normal):
        """``{d : <normal, d> <= 0}``."""
        return polar(cls.ray(normal))

    # -- queries -------------------------------------------------------------
    @property
    def is_halfplane(self) -> bool:
        return self.kind == SECTOR and self.width >= math.pi - ANGLE_TOL

    def arcs(self) -> list[tuple[float, float]]:
        if self.kind == ZERO:
            return []
        if self.kind == PLANE:
            return [(0.0, TWO_PI)]
        if self.kind == LINE:
            return [(self.start, self.start), (self.start + math.pi, self.start + math.pi)]
        return [(self.start, self.start + self.width)]

    def generators(self) -> list[np.ndarray]:
        """Finite direction set whose convex conic hull is the cone."""
        if self.kind == ZERO:
            return []
        if self.kind == RAY:
            return [unit(self.start)]
        if self.kind == LINE:
            return [unit(self.start), -unit(self.start)]
        if self.kind == PLANE:
            return [unit(k * math.pi / 2) for k in range(4)]
        gens = [unit(self.start), unit(self.start + self.width)]
        if self.is_halfplane:
            gens.append(unit(self.start + self.width / 2))
        return gens

    def angular_distance(self, d) -> float:
        """Angle between direction ``d`` and the cone (0 when ``d`` lies in it)."""
        if self.kind == PLANE:
            return 0.0
        if self.kind == ZERO:
            return math.pi
        phi = angle_of(d)
        best = math.pi
        for s, e in self.arcs():
            off = canonical_angle(phi - s)
            if off <= e - s:
                return 0.0
            best = min(best, _angle_gap(phi, s), _angle_gap(phi, e))
        return best

    def contains(self, d, tol: float = ANGLE_TOL) -> bool:
        d = as_vector(d, 2)
        if not np.any(d):
            return True
        return self.angular_distance(d) <= tol

    def isclose(self, other: "PolyhedralCone2D", tol: float = ANGLE_TOL) -> bool:
        if self.kind != other.kind:
            return False
        if self.kind in (ZERO, PLANE):
            return True
        if self.kind == LINE:
            d = abs(self.start - other.start)
            return min(d, math.pi - d) <= tol
        return _angle_gap(self.start, other.start) <= tol and abs(self.width - other.width) <= tol

    def __neg__(self):
        if self.kind in (RAY, SECTOR):
            return PolyhedralCone2D(self.kind, canonical_angle(self.start + math.pi), self.width)
        return self

    def __repr__(self):
        if self.kind in (ZERO, PLANE):
            return f"Cone({self.kind})"
        if self.kind in (RAY, LINE):
            return f"Cone({self.kind} at {self.start:.6g} rad)"
        return f"Cone(sector [{self.start:.6g}, {self.start + self.width:.6g}] rad)"


@dataclass(frozen=True)
class ConeClass:
    shape: str  # zero | ray | line | sector | halfplane | plane
    is_ray: bool
    is_linear_subspace: bool


def classify(K: PolyhedralCone2D) -> ConeClass:
    shape = "halfplane" if K.is_halfplane else K.kind
    return ConeClass(shape, K.kind == RAY, K.kind in (ZERO, LINE, PLANE))


def polar(K: PolyhedralCone2D) -> PolyhedralCone2D:
    """``K^⊖ = {y : <y, x> <= 0 for all x in K}``."""
    if K.kind == ZERO:
        return PolyhedralCone2D.plane()
    if K.kind == PLANE:
        return PolyhedralCone2D.zero()
    if K.kind == LINE:
        return PolyhedralCone2D.line_at(K.start + math.pi / 2)
    if K.kind == RAY:
        return PolyhedralCone2D.sector(K.start + math.pi / 2, math.pi)
    end = K.start + K.width
    return PolyhedralCone2D.sector(end + math.pi / 2, math.pi - K.width)


def polar_plus(K: PolyhedralCone2D) -> PolyhedralCone2D:
    """``K^⊕ = -K^⊖``."""
    return -polar(K)


def span(K: PolyhedralCone2D) -> PolyhedralCone2D:
    if K.kind in (ZERO, LINE, PLANE):
        return K
    if K.kind == RAY:
        return PolyhedralCone2D.line_at(K.start)
    return PolyhedralCone2D.plane()


def orthogonal_complement(K: PolyhedralCone2D) -> PolyhedralCone2D:
    """``K^⊥``: vectors orthogonal to every element of ``K``."""
    S = span(K)
    if S.kind == ZERO:
        return PolyhedralCone2D.plane()
    if S.kind == PLANE:
        return PolyhedralCone2D.zero()
    return PolyhedralCone2D.line_at(S.start + math.pi / 2)


def _from_arcs(pieces: list[tuple[float, float]]) -> PolyhedralCone2D:
    pieces = sorted((canonical_angle(s), canonical_angle(s) + (e - s)) for s, e in pieces)
    merged: list[list[float]] = []
    for s, e in pieces:
        if merged and s <= merged[-1][1] + ANGLE_TOL:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    # an arc ending past 2*pi may overlap the first one
    if len(merged) > 1 and merged[-1][1] >= merged[0][0] + TWO_PI - ANGLE_TOL:
        last = merged.pop()
        merged[0] = [last[0], max(last[1], merged[0][1] + TWO_PI)]
    if not merged:
        return PolyhedralCone2D.zero()
    if len(merged) == 1:
        s, e = merged[0]
        return PolyhedralCone2D.sector(s, e - s)
    if len(merged) == 2:
        (s1, e1), (s2, e2) = merged
        if e1 - s1 <= ANGLE_TOL and e2 - s2 <= ANGLE_TOL and abs(_angle_gap(s1, s2) - math.pi) <= 1e-9:
            return PolyhedralCone2D.line_at(s1)
    raise DomainError(f"arc set {merged} is not a convex cone")


def intersect(K1: PolyhedralCone2D, K2: PolyhedralCone2D) -> PolyhedralCone2D:
    if K1.kind == ZERO or K2.kind == ZERO:
        return PolyhedralCone2D.zero()
    if K1.kind == PLANE:
        return K2
    if K2.kind == PLANE:
        return K1
    pieces = []
    for s1, e1 in K1.arcs():
        for s2, e2 in K2.arcs():
            for shift in (-TWO_PI, 0.0, TWO_PI):
                lo, hi = max(s1, s2 + shift), min(e1, e2 + shift)
                if lo <= hi + ANGLE_TOL:
                    pieces.append((lo, max(lo, hi)))
    return _from_arcs(pieces)


def is_subset(K1: PolyhedralCone2D, K2: PolyhedralCone2D, tol: float = ANGLE_TOL) -> bool:
    return all(K2.contains(g, tol) for g in K1.generators())


def conic_hull(directions: Iterable) -> PolyhedralCone2D:
    """Closed convex conic hull of finitely many planar vectors (zeros ignored)."""
    angles = sorted({round(angle_of(d), 15) for d in directions if np.linalg.norm(d) > 0.0})
    if not angles:
        return PolyhedralCone2D.zero()
    if len(angles) == 1:
        return PolyhedralCone2D.ray_at(angles[0])
    if all(_angle_gap(a, angles[0]) <= ANGLE_TOL or abs(_angle_gap(a, angles[0]) - math.pi) <= ANGLE_TOL
           for a in angles):
        if any(abs(_angle_gap(a, angles[0]) - math.pi) <= ANGLE_TOL for a in angles):
            return PolyhedralCone2D.line_at(angles[0])
        return PolyhedralCone2D.ray_at(angles[0])
    gaps = [(angles[(i + 1) % len(angles)] - a) % TWO_PI for i, a in enumerate(angles)]
    i = int(np.argmax(gaps))
    gap = gaps[i]
    if gap < math.pi - ANGLE_TOL:
        return PolyhedralCone2D.plane()
    start = angles[(i + 1) % len(angles)]
    return PolyhedralCone2D.sector(start, TWO_PI - gap)


# -- H-polyhedra ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolyhedronH:
    """``{x : normals @ x <= offsets}``; may be empty or unbounded."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise DimensionMismatch(f"{A.shape[0]} normals but {b.size} offsets")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise DomainError("non-finite polyhedron data")
        if np.any(np.linalg.norm(A, axis=1) == 0.0):
            raise DomainError("polyhedron row with zero normal")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[Sequence[float], float]]):
        return cls([u for u, _ in rows], [eta for _, eta in rows])

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def n_rows(self) -> int:
        return self.normals.shape[0]

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = as_vector(x, self.dim)
        return bool(np.all(self.normals @ x <= self.offsets + tol * (1.0 + np.abs(self.offsets))))

    def violation(self, x) -> float:
        return float(max(0.0, np.max(self.normals @ x - self.offsets)))

    def recession_cone_2d(self) -> PolyhedralCone2D:
        if self.dim != 2:
            raise UnsupportedDimension(f"planar cone requested in dimension {self.dim}")
        return recession_cone(self).to_cone2d()

    def to_cone2d(self) -> PolyhedralCone2D:
        """Convert a planar cone given in H-form (offsets ignored)."""
        if self.dim != 2:
            raise UnsupportedDimension(f"planar cone requested in dimension {self.dim}")
        K = PolyhedralCone2D.plane()
        for u in self.normals:
            K = intersect(K, PolyhedralCone2D.halfplane(u))
        return K


def recession_cone(P: PolyhedronH) -> PolyhedronH:
    """``rec P = {d : <u_i, d> <= 0}``.  Meaningless when ``P`` is empty."""
    return PolyhedronH(P.normals.copy(), np.zeros(P.n_rows))


def _check_planar(P: PolyhedronH):
    if P.dim != 2:
        raise UnsupportedDimension(f"planar routine called in dimension {P.dim}")
    if P.n_rows > MAX_ROWS_2D:
        raise DomainError(f"{P.n_rows} rows exceed the cap of {MAX_ROWS_2D}")


def vertices_2d(P: PolyhedronH, tol: float = 1e-9) -> list[np.ndarray]:
    """Vertices by brute-force enumeration of the 2x2 active-constraint systems."""
    _check_planar(P)
    out: list[np.ndarray] = []
    for i, j in itertools.combinations(range(P.n_rows), 2):
        M = P.normals[[i, j]]
        if abs(np.linalg.det(M)) <= 1e-12 * np.linalg.norm(M[0]) * np.linalg.norm(M[1]):
            continue
        v = np.linalg.solve(M, P.offsets[[i, j]])
        if P.contains(v, tol) and not any(np.linalg.norm(v - w) <= tol * (1 + np.linalg.norm(v)) for w in out):
            out.append(v)
    return out


def decompose_2d(P: PolyhedronH) -> tuple[list[np.ndarray], PolyhedralCone2D]:
    """Points and recession cone with ``P = conv(points) + rec P``.

    Raises :class:`EmptySet` when ``P`` is empty.
    """
    _check_planar(P)
    rec = P.recession_cone_2d()
    if rec.kind == PLANE:
        return [np.zeros(2)], rec
    if rec.kind == LINE or rec.is_halfplane:
        # both shapes contain the line through unit(rec.start); slice orthogonally to it
        ell = unit(rec.start)
        n = np.array([-ell[1], ell[0]])
        a = P.normals @ n
        lo, hi = -math.inf, math.inf
        for ai, bi in zip(a, P.offsets):
            if abs(ai) <= 1e-12:
                if bi < -1e-12:
                    raise EmptySet("polyhedron is empty")
            elif ai > 0:
                hi = min(hi, bi / ai)
            else:
                lo = max(lo, bi / ai)
        if lo > hi + 1e-12:
            raise EmptySet("polyhedron is empty")
        pts = [t * n for t in (lo, hi) if math.isfinite(t)]
        return pts, rec
    verts = vertices_2d(P)
    if not verts:
        raise EmptySet("polyhedron is empty")
    return verts, rec


def conic_hull_of_difference(A: PolyhedronH, B: PolyhedronH) -> PolyhedralCone2D:
    """``ccone(A - B)``, the closed conic hull of all differences ``a - b``."""
    pa, ra = decompose_2d(A)
    pb, rb = decompose_2d(B)
    dirs = [va - vb for va in pa for vb in pb]
    dirs += ra.generators()
    dirs += [-g for g in rb.generators()]
    return conic_hull(dirs)


def separating_functionals(A: PolyhedronH, B: PolyhedronH) -> PolyhedralCone2D:
    """``(ccone(A - B))^⊖``: the separating functionals together with the origin."""
    return polar(conic_hull_of_difference(A, B))


@dataclass(frozen=True)
class ConeAnalysis:
    """Cones attached to a pair of sets driven by alternating projections."""

    R: PolyhedralCone2D
    R_polar_plus: PolyhedralCone2D
    cluster_cone: PolyhedralCone2D

    @classmethod
    def from_recession_cones(cls, rec_a: PolyhedralCone2D, rec_b: PolyhedralCone2D):
        R = intersect(rec_a, rec_b)
        Rp = polar_plus(R)
        return cls(R, Rp, intersect(R, Rp))

    @property
    def is_ray_R(self) -> bool:
        return classify(self.R).is_ray

    @property
    def is_ray_cluster(self) -> bool:
        return classify(self.cluster_cone).is_ray

    @property
    def R_is_subspace(self) -> bool:
        return classify(self.R).is_linear_subspace

    @property
    def R_polar_plus_is_subspace(self) -> bool:
        return classify(self.R_polar_plus).is_linear_subspace

    def digest(self) -> dict:
        def clean(v):
            # drop trig round-off such as 6e-17 and -0.0
            return (np.round(v, 14) + 0.0).tolist()

        def cone(K):
            d = {"shape": classify(K).shape}
            if K.kind in (RAY, LINE):
                d["direction"] = clean(unit(K.start))
            elif K.kind == SECTOR:
                d["from"] = clean(unit(K.start))
                d["to"] = clean(unit(K.start + K.width))
            return d

        return {
            "R": cone(self.R),
            "R_polar_plus": cone(self.R_polar_plus),
            "cluster": cone(self.cluster_cone),
            "is_ray_R": self.is_ray_R,
            "is_ray_cluster": self.is_ray_cluster,
            "R_is_subspace": self.R_is_subspace,
            "R_polar_plus_is_subspace": self.R_polar_plus_is_subspace,
        }
