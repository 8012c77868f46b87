"""Vectors, directions and the extended Poincaré metric on the cosmic closure.

The cosmic closure ``csm X`` of ``X = R^d`` is ``X`` together with the horizon,
the set of directions ``dir x = R_{++} x``.  Each direction is represented by
its unit vector.  The metric embeds finite points into the open unit ball via
``x -> x / (1 + |x|)`` and directions onto the unit sphere, then measures the
Euclidean distance between the images.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, NonUnitDirection, ZeroVector

ZERO_TOL = 1e-14
UNIT_TOL = 1e-12


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, optionally checking its length."""
    v = np.array(x, dtype=float).reshape(-1) if np.ndim(x) == 0 else np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector has non-finite coordinates")
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.size}")
    return v


def _frozen(v: np.ndarray) -> np.ndarray:
    v = np.array(v, dtype=float)
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class CosmicPoint:
    """A point of ``csm X``: a finite vector or a direction (unit representer)."""

    coords: np.ndarray
    is_direction: bool = False

    @classmethod
    def finite(cls, x) -> "CosmicPoint":
        return cls(_frozen(as_vector(x)), False)

    @classmethod
    def direction(cls, u, tol: float = UNIT_TOL) -> "CosmicPoint":
        u = as_vector(u)
        if abs(np.linalg.norm(u) - 1.0) > tol:
            raise NonUnitDirection(f"direction payload has norm {np.linalg.norm(u)!r}")
        return cls(_frozen(u), True)

    @property
    def dim(self) -> int:
        return self.coords.size

    def embed(self) -> np.ndarray:
        """Image in the closed unit ball."""
        if self.is_direction:
            return self.coords
        return self.coords / (1.0 + np.linalg.norm(self.coords))

    def __eq__(self, other):
        if not isinstance(other, CosmicPoint):
            return NotImplemented
        if self.is_direction != other.is_direction or self.dim != other.dim:
            return False
        if self.is_direction:
            return bool(np.linalg.norm(self.coords - other.coords) <= UNIT_TOL)
        return bool(np.array_equal(self.coords, other.coords))

    __hash__ = None

    def __repr__(self):
        kind = "Direction" if self.is_direction else "Finite"
        return f"{kind}({self.coords.tolist()})"


def direction_of(x, zero_tol: float = ZERO_TOL) -> CosmicPoint:
    """``dir x`` as a :class:`CosmicPoint`; raises :class:`ZeroVector` when ``|x| <= zero_tol``."""
    x = as_vector(x)
    r = np.linalg.norm(x)
    if r <= zero_tol:
        raise ZeroVector(f"|x| = {r!r} <= {zero_tol!r}")
    return CosmicPoint(_frozen(x / r), True)


def poincare_distance(p: CosmicPoint, q: CosmicPoint) -> float:
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions {p.dim} and {q.dim} differ")
    return float(np.linalg.norm(p.embed() - q.embed()))


def direction_distance(u, w) -> float:
    """Poincaré distance between two directions given by (not necessarily unit) vectors."""
    return poincare_distance(direction_of(u), direction_of(w))
