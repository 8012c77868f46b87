"""Catalogue of nonexpansive operators on ``R^d``.

Projectors onto closed convex sets, proximity operators of scalar convex
functions, their lifts along a unit direction or a subspace, the proximity
operator of ``(p1, p2) -> exp(p1) / p2``, compositions, and an empirical
(firm) nonexpansiveness checker.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import roots
from .cones import PolyhedralCone2D, PolyhedronH
from .errors import (BasisNotOrthonormal, DimensionMismatch, DomainError, NoConvergence,
                     NonUnitDirection, UnsupportedDimension)
from .vecgeo import UNIT_TOL, as_vector

PROJ_TOL = 1e-12
PROX_TOL = 1e-12
MAX_DYKSTRA_SWEEPS = 100_000


# -- sets -----------------------------------------------------------------------


class ConvexSet:
    """Nonempty closed convex subset of ``R^d`` with a nearest-point map."""

    dim: int

    def project(self, x: np.ndarray, tol: float = PROJ_TOL) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def recession_cone_2d(self) -> PolyhedralCone2D:
        raise NotImplementedError


def _nonzero(u, what):
    u = as_vector(u)
    if not np.any(u):
        raise DomainError(f"{what} normal must be nonzero")
    return u


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{x : <u, x> <= eta}``."""

    u: np.ndarray
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "u", _nonzero(self.u, "halfspace"))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def dim(self):
        return self.u.size

    def project(self, x, tol=PROJ_TOL):
        s = float(self.u @ x) - self.eta
        if s <= 0.0:
            return x
        return x - (s / float(self.u @ self.u)) * self.u

    def contains(self, x, tol=1e-9):
        return float(self.u @ x) <= self.eta + tol

    def recession_cone_2d(self):
        return PolyhedralCone2D.halfplane(self.u)


@dataclass(frozen=True, eq=False)
class Hyperplane(ConvexSet):
    """``{x : <u, x> = eta}``."""

    u: np.ndarray
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "u", _nonzero(self.u, "hyperplane"))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def dim(self):
        return self.u.size

    def project(self, x, tol=PROJ_TOL):
        return x - ((float(self.u @ x) - self.eta) / float(self.u @ self.u)) * self.u

    def contains(self, x, tol=1e-9):
        return abs(float(self.u @ x) - self.eta) <= tol

    def recession_cone_2d(self):
        return PolyhedralCone2D.line(np.array([-self.u[1], self.u[0]]))


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConvexSet):
    """``offset + span(basis)``; the basis rows need not be orthonormal."""

    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        off = as_vector(self.offset)
        B = np.asarray(self.basis, dtype=float).reshape(-1, off.size)
        if B.shape[0]:
            q, r = np.linalg.qr(B.T)
            if np.any(np.abs(np.diag(r)) <= 1e-12):
                raise DomainError("affine subspace basis is rank deficient")
        else:
            q = np.zeros((off.size, 0))
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "_q", q)

    @property
    def dim(self):
        return self.offset.size

    def project(self, x, tol=PROJ_TOL):
        q = self._q
        return self.offset + q @ (q.T @ (x - self.offset))

    def contains(self, x, tol=1e-9):
        return float(np.linalg.norm(self.project(x) - x)) <= tol

    def recession_cone_2d(self):
        k = self._q.shape[1]
        if k == 0:
            return PolyhedralCone2D.zero()
        if k == 1:
            return PolyhedralCone2D.line(self._q[:, 0])
        return PolyhedralCone2D.plane()


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = as_vector(self.lo), as_vector(self.hi)
        if lo.size != hi.size:
            raise DimensionMismatch("box bounds differ in length")
        if np.any(lo > hi):
            raise DomainError("box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def project(self, x, tol=PROJ_TOL):
        return np.clip(x, self.lo, self.hi)

    def contains(self, x, tol=1e-9):
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def recession_cone_2d(self):
        return PolyhedralCone2D.zero()


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def project(self, x, tol=PROJ_TOL):
        d = x - self.center
        r = float(np.linalg.norm(d))
        if r <= self.radius:
            return x
        return self.center + (self.radius / r) * d

    def contains(self, x, tol=1e-9):
        return float(np.linalg.norm(x - self.center)) <= self.radius + tol

    def recession_cone_2d(self):
        return PolyhedralCone2D.zero()


@dataclass(frozen=True, eq=False)
class EpigraphReciprocal(ConvexSet):
    """``{(s1, s2) : s1 > 0, s2 >= c / s1}`` in the plane."""

    c: float = 1.0
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("epigraph scale c must be positive")
        object.__setattr__(self, "c", float(self.c))

    def boundary_foot(self, x1: float, x2: float, tol: float = PROJ_TOL) -> float:
        """Parameter ``t > 0`` of the nearest boundary point ``(t, c / t)``.

        ``t`` is the positive root of ``t^4 - x1 t^3 + c x2 t - c^2``.
        """
        c = self.c

        def h(t):
            return ((t - x1) * t * t + c * x2) * t - c * c

        def dh(t):
            return (4.0 * t - 3.0 * x1) * t * t + c * x2

        def scale(t):
            # size of the quartic's terms; residuals are measured against it
            return t ** 3 * (t + abs(x1)) + c * abs(x2) * t + c * c

        t_hi = max(1.0, x1, abs(x2), c)
        while h(t_hi) <= 0.0:
            t_hi *= 2.0
        h_hi = h(t_hi)
        t = roots.safeguarded_newton(h, dh, 0.0, -c * c, t_hi, h_hi, tol * scale(t_hi), x0=t_hi)
        # the bracket end can overstate the scale by orders of magnitude; polish at the root
        return roots.safeguarded_newton(h, dh, 0.0, -c * c, t_hi, h_hi, tol * scale(t), x0=t)

    def project(self, x, tol=PROJ_TOL):
        x1, x2 = float(x[0]), float(x[1])
        if x1 > 0.0 and x2 * x1 >= self.c:
            return x
        t = self.boundary_foot(x1, x2, tol)
        return np.array([t, self.c / t])

    def contains(self, x, tol=1e-9):
        return bool(x[0] > 0.0 and x[1] >= self.c / x[0] - tol)

    def recession_cone_2d(self):
        return PolyhedralCone2D.sector(0.0, math.pi / 2)


def dykstra(P: PolyhedronH, x: np.ndarray, tol: float = PROJ_TOL,
            max_sweeps: int = MAX_DYKSTRA_SWEEPS) -> np.ndarray:
    """Nearest point of ``P`` via Dykstra's algorithm over its halfspaces.

    The iterate alone can stall for many sweeps while the correction terms
    still drift, so a sweep must also leave the corrections unchanged.
    """
    A, b = P.normals, P.offsets
    if np.all(A @ x <= b):
        return x
    nrm2 = np.einsum("ij,ij->i", A, A)
    y = np.array(x, dtype=float)
    incr = np.zeros_like(A)
    for _ in range(max_sweeps):
        prev, prev_incr = y, incr.copy()
        for i in range(A.shape[0]):
            z = y + incr[i]
            s = A[i] @ z - b[i]
            y = z - (s / nrm2[i]) * A[i] if s > 0.0 else z
            incr[i] = z - y
        if (np.linalg.norm(y - prev) < tol and np.linalg.norm(incr - prev_incr) < tol
                and P.violation(y) <= tol):
            return y
    raise NoConvergence(f"Dykstra did not settle within {max_sweeps} sweeps")


def project(S, x, tol: float = PROJ_TOL) -> np.ndarray:
    """Nearest point of the set ``S`` to ``x``."""
    x = as_vector(x, S.dim)
    if isinstance(S, PolyhedronH):
        return dykstra(S, x, tol)
    return S.project(x, tol)


def set_contains(S, x, tol: float = 1e-9) -> bool:
    return S.contains(as_vector(x, S.dim), tol)


# -- scalar convex functions and their proximity operators ----------------------------


@dataclass(frozen=True)
class ScalarConvexFn:
    """Proper lsc convex ``f`` on the open interval ``(lo, hi)``.

    ``deriv2`` is optional; without it the root finder falls back to secant
    steps inside the bracket.
    """

    name: str
    value: Callable[[float], float]
    deriv: Callable[[float], float]
    deriv2: Optional[Callable[[float], float]] = None
    lo: float = -math.inf
    hi: float = math.inf


def reciprocal(c: float) -> ScalarConvexFn:
    """``s -> c / s`` on ``s > 0``."""
    if not c > 0:
        raise DomainError("reciprocal scale must be positive")
    return ScalarConvexFn(f"reciprocal({c!r})", lambda s: c / s, lambda s: -c / (s * s),
                          lambda s: 2.0 * c / (s * s * s), 0.0, math.inf)


def exp_neg() -> ScalarConvexFn:
    """``s -> exp(-s)``: bounded below, no minimizer."""
    return ScalarConvexFn("exp_neg", lambda s: math.exp(-s), lambda s: -math.exp(-s), lambda s: math.exp(-s))


def zero_fn() -> ScalarConvexFn:
    return ScalarConvexFn("zero", lambda s: 0.0, lambda s: 0.0, lambda s: 0.0)


def prox_scalar(f: ScalarConvexFn, x: float, tol: float = PROX_TOL) -> float:
    """Minimizer of ``f(p) + (p - x)^2 / 2``.

    Solves ``p - x + f'(p) = 0`` inside the domain of ``f``.  The residual is
    driven below ``tol * (1 + |x|)``; an absolute bound is unreachable in
    double precision once ``|x|`` is large.
    """
    x = float(x)
    lo, hi = f.lo, f.hi
    if lo < x < hi:
        p0 = x
    elif x <= lo:
        p0 = lo + (1.0 if math.isinf(hi) else 0.5 * (hi - lo))
    else:
        p0 = hi - (1.0 if math.isinf(lo) else 0.5 * (hi - lo))
    fd, fd2 = f.deriv, f.deriv2

    def g(p):
        return p - x + fd(p)

    dg = None if fd2 is None else (lambda p: 1.0 + fd2(p))
    a, ga, b, gb = roots.grow_bracket(g, p0, lo, hi)
    if a == b:
        return a
    return roots.safeguarded_newton(g, dg, a, ga, b, gb, tol * (1.0 + abs(x)), x0=p0)


# -- the exp-ratio proximity operator ------------------------------------------------------


def prox_exp_ratio(x, tol: float = PROX_TOL, max_iter: int = 500) -> np.ndarray:
    """Proximity operator of ``F(p) = exp(p1) / p2`` on ``p2 > 0``.

    Damped Newton on the gradient system of ``F(p) + |p - x|^2 / 2``; a trial
    step is halved (at most 60 times) while it leaves ``p2 > 0`` or fails to
    decrease the gradient norm.
    """
    x = as_vector(x, 2)
    p1, p2 = _prox_exp_ratio(float(x[0]), float(x[1]), tol, max_iter)
    return np.array([p1, p2])


def _prox_exp_ratio(x1: float, x2: float, tol: float, max_iter: int) -> tuple[float, float]:
    p1, p2 = min(x1, 0.0), max(x2, 1.0)
    e = math.exp(p1)
    g1, g2 = e / p2 + p1 - x1, -e / (p2 * p2) + p2 - x2
    gn = math.hypot(g1, g2)
    for _ in range(max_iter):
        if gn < tol:
            return p1, p2
        h11 = e / p2 + 1.0
        h12 = -e / (p2 * p2)
        h22 = 2.0 * e / (p2 * p2 * p2) + 1.0
        det = h11 * h22 - h12 * h12
        d1 = -(h22 * g1 - h12 * g2) / det
        d2 = -(h11 * g2 - h12 * g1) / det
        s = 1.0
        for _ in range(61):
            q1, q2 = p1 + s * d1, p2 + s * d2
            if q2 > 0.0:
                eq = math.exp(q1)
                n1, n2 = eq / q2 + q1 - x1, -eq / (q2 * q2) + q2 - x2
                nn = math.hypot(n1, n2)
                if nn < gn:
                    break
            s *= 0.5
        else:
            raise NoConvergence(f"line search stalled at ({p1!r}, {p2!r}), |g| = {gn!r}")
        p1, p2, e, g1, g2, gn = q1, q2, eq, n1, n2, nn
    if gn < tol:
        return p1, p2
    raise NoConvergence(f"exp-ratio prox: |g| = {gn!r} after {max_iter} iterations")


# -- operators --------------------------------------------------------------------------


class OperatorClass(str, enum.Enum):
    NONEXPANSIVE = "nonexpansive"
    FIRMLY_NONEXPANSIVE = "firmly_nonexpansive"


@dataclass(frozen=True, eq=False)
class Operator:
    """A map ``R^dim -> R^dim`` with its claimed regularity class."""

    kind: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    claimed_class: OperatorClass = OperatorClass.NONEXPANSIVE
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.fn(as_vector(x, self.dim))


def identity(dim: int) -> Operator:
    return Operator("identity", dim, lambda x: x, OperatorClass.FIRMLY_NONEXPANSIVE)


def translation(c) -> Operator:
    c = as_vector(c)
    return Operator("translation", c.size, lambda x: x + c, OperatorClass.NONEXPANSIVE, {"c": c})


def linear(M) -> Operator:
    """``x -> M x``; the nonexpansive claim is the caller's."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch("linear operator needs a square matrix")
    return Operator("linear", M.shape[0], lambda x: M @ x, OperatorClass.NONEXPANSIVE, {"M": M})


def rotation(theta: float) -> Operator:
    c, s = math.cos(theta), math.sin(theta)
    return linear([[c, -s], [s, c]])


def projector(S, tol: float = PROJ_TOL) -> Operator:
    if isinstance(S, PolyhedronH):
        fn = lambda x: dykstra(S, x, tol)  # noqa: E731
    else:
        fn = lambda x: S.project(x, tol)  # noqa: E731
    return Operator("projector", S.dim, fn, OperatorClass.FIRMLY_NONEXPANSIVE, {"set": S})


def scalar_prox(f: ScalarConvexFn, tol: float = PROX_TOL) -> Operator:
    """``prox_f`` acting on ``R^1``."""
    return Operator("scalar_prox", 1, lambda x: np.array([prox_scalar(f, x[0], tol)]),
                    OperatorClass.FIRMLY_NONEXPANSIVE, {"f": f})


def lift_prox_along_direction(a, f: ScalarConvexFn, tol: float = PROX_TOL) -> Operator:
    """``x -> (x - <a, x> a) + prox_f(<a, x>) a`` for a unit vector ``a``."""
    a = as_vector(a)
    if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
        raise NonUnitDirection(f"|a| = {np.linalg.norm(a)!r}")

    def fn(x):
        s = float(a @ x)
        return x + (prox_scalar(f, s, tol) - s) * a

    return Operator("prox_lifted", a.size, fn, OperatorClass.FIRMLY_NONEXPANSIVE, {"a": a, "f": f})


def lifted_resolvent(basis, inner: Operator) -> Operator:
    """``x -> P_{Y^perp} x + U inner(U^T x)`` where the rows of ``basis`` span ``Y``."""
    U = np.atleast_2d(np.asarray(basis, dtype=float)).T
    d, k = U.shape
    if k > d:
        raise DimensionMismatch(f"{k} basis vectors in dimension {d}")
    if np.max(np.abs(U.T @ U - np.eye(k))) > 1e-10:
        raise BasisNotOrthonormal("subspace basis is not orthonormal")
    if inner.dim != k:
        raise DimensionMismatch(f"inner operator acts on dimension {inner.dim}, subspace has {k}")
    inner_fn = inner.fn

    def fn(x):
        y = U.T @ x
        return x + U @ (inner_fn(y) - y)

    return Operator("lifted_resolvent", d, fn, inner.claimed_class, {"basis": U.T.copy(), "inner": inner})


def exp_ratio_prox_operator(tol: float = PROX_TOL) -> Operator:
    def fn(x):
        p1, p2 = _prox_exp_ratio(float(x[0]), float(x[1]), tol, 500)
        return np.array([p1, p2])

    return Operator("prox_exp_ratio", 2, fn, OperatorClass.FIRMLY_NONEXPANSIVE)


def compose(ops: Sequence[Operator]) -> Operator:
    """Right-to-left composition: ``compose([P, Q])(x) == P(Q(x))``."""
    ops = list(ops)
    if not ops:
        raise DomainError("cannot compose an empty operator list")
    dim = ops[0].dim
    if any(op.dim != dim for op in ops):
        raise DimensionMismatch("composed operators differ in dimension")
    fns = [op.fn for op in reversed(ops)]
    if len(ops) == 1:
        return Operator("composition", dim, fns[0], ops[0].claimed_class, {"ops": ops})

    def fn(x):
        for f in fns:
            x = f(x)
        return x

    return Operator("composition", dim, fn, OperatorClass.NONEXPANSIVE, {"ops": ops})


# -- empirical checks -------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorClassReport:
    max_ratio: float
    max_firm_violation: float
    n_pairs: int
    n_skipped: int

    def as_dict(self) -> dict:
        return {"max_ratio": self.max_ratio, "max_firm_violation": self.max_firm_violation,
                "n_pairs": self.n_pairs, "n_skipped": self.n_skipped}


def check_operator_class(T: Operator, domain_box: Box, n_pairs: int = 1000, seed: int = 0) -> OperatorClassReport:
    """Largest Lipschitz ratio and firm-nonexpansiveness defect over random pairs.

    Reports only; nothing is raised when ``T`` violates its claim.
    """
    if n_pairs < 1:
        raise DomainError("n_pairs must be at least 1")
    if domain_box.dim != T.dim:
        raise DimensionMismatch("sampling box and operator differ in dimension")
    rng = np.random.default_rng(seed)
    X = rng.uniform(domain_box.lo, domain_box.hi, size=(n_pairs, T.dim))
    Y = rng.uniform(domain_box.lo, domain_box.hi, size=(n_pairs, T.dim))
    max_ratio, max_viol, skipped = 0.0, 0.0, 0
    for x, y in zip(X, Y):
        dx = x - y
        nd = float(np.linalg.norm(dx))
        if nd < 1e-12:
            skipped += 1
            continue
        dt = T.fn(x) - T.fn(y)
        max_ratio = max(max_ratio, float(np.linalg.norm(dt)) / nd)
        max_viol = max(max_viol, float(dt @ dt - dt @ dx))
    return OperatorClassReport(max_ratio, max_viol, n_pairs, skipped)
