"""Orbit generation and asymptotic diagnostics.

An orbit ``x_n = T^n x_0`` is stored as a dense array; :class:`OrbitRecord`
views are produced on demand.  The trichotomy classifier, the ``v``
estimator and the cosmic-limit detector all read from the same arrays.
"""
from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cones import ConeAnalysis
from .errors import CosmicError, DimensionMismatch, FixedPointDetected, NumericalError, OrbitTooShort
from .operators import Operator, project
from .vecgeo import ZERO_TOL, as_vector

TAIL_FRACTION = 0.2
LINEAR_RATE_THRESHOLD = 1e-3
# growth over the last doubling of n must be at least this fraction of the
# growth over the previous doubling for the orbit to count as unbounded
GROWTH_RATIO_MIN = 0.75
# local exponent a in |x_n| ~ n^a above which growth counts as linear
LINEAR_EXPONENT_MIN = 0.85
DETECT_WINDOW = 200
DIR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    n: int
    x: np.ndarray
    norm: float
    q: Optional[np.ndarray]
    x_over_n: Optional[np.ndarray]
    step: Optional[np.ndarray]


class Orbit(Sequence):
    """Iterates ``x_0, ..., x_N`` with derived per-step quantities."""

    def __init__(self, xs, zero_tol: float = ZERO_TOL):
        xs = np.array(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[0] == 0:
            raise DimensionMismatch("orbit array must have shape (n_records, dim)")
        xs.setflags(write=False)
        self.xs = xs
        self.zero_tol = zero_tol
        self.norms = np.linalg.norm(xs, axis=1)
        self.has_q = self.norms > zero_tol
        qs = np.full_like(xs, np.nan)
        qs[self.has_q] = xs[self.has_q] / self.norms[self.has_q, None]
        self.qs = qs
        n = np.arange(xs.shape[0], dtype=float)
        self.x_over_n = np.full_like(xs, np.nan)
        self.x_over_n[1:] = xs[1:] / n[1:, None]
        self.steps = np.full_like(xs, np.nan)
        self.steps[1:] = np.diff(xs, axis=0)

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def n_steps(self) -> int:
        return self.xs.shape[0] - 1

    def __len__(self):
        return self.xs.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        n = range(len(self))[i]
        return OrbitRecord(
            n=n,
            x=self.xs[n],
            norm=float(self.norms[n]),
            q=self.qs[n] if self.has_q[n] else None,
            x_over_n=self.x_over_n[n] if n else None,
            step=self.steps[n] if n else None,
        )


def iterate(T: Operator, x0, n_steps: int, zero_tol: float = ZERO_TOL) -> Orbit:
    """Records ``T^n x0`` for ``n = 0..n_steps``.

    Operator failures propagate with the failing step stored in ``exc.step``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    x = as_vector(x0, T.dim)
    xs = np.empty((n_steps + 1, T.dim))
    xs[0] = x
    fn = T.fn
    for n in range(1, n_steps + 1):
        try:
            x = fn(x)
        except CosmicError as exc:
            exc.step = n
            raise
        except (ArithmeticError, ValueError) as exc:
            err = NumericalError(f"operator failed at step {n}: {exc}")
            err.step = n
            raise err from exc
        xs[n] = x
    if not np.all(np.isfinite(xs)):
        bad = int(np.argmin(np.all(np.isfinite(xs), axis=1)))
        err = NumericalError(f"orbit left the reals at step {bad}")
        err.step = bad
        raise err
    return Orbit(xs, zero_tol)


def _tail_slice(orbit: Orbit, tail_fraction: float) -> slice:
    k = max(1, int(math.ceil(tail_fraction * orbit.n_steps)))
    return slice(len(orbit) - k, len(orbit))


def estimate_v(orbit: Orbit, tail_fraction: float = TAIL_FRACTION) -> np.ndarray:
    """``v`` estimated as minus the tail mean of ``(x_n - x_0) / n``.

    Subtracting ``x_0`` removes the ``x_0 / n`` bias of plain ``x_n / n``
    without changing the limit.
    """
    if len(orbit) < 10:
        raise OrbitTooShort(f"need at least 10 records, got {len(orbit)}")
    tail = _tail_slice(orbit, tail_fraction)
    n = np.arange(len(orbit), dtype=float)[tail, None]
    return -((orbit.xs[tail] - orbit.xs[0]) / n).mean(axis=0)


class Trichotomy(str, enum.Enum):
    BOUNDED = "BoundedOrbit"
    SUBLINEAR = "DivergentSublinear"
    LINEAR = "DivergentLinear"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True, eq=False)
class TrichotomyVerdict:
    case: Trichotomy
    v_estimate: np.ndarray
    diagnostics: dict
    thresholds: dict


def classify_trichotomy(orbit: Orbit, bounded_norm_cap: Optional[float] = None,
                        growth_window: Optional[int] = None,
                        linear_rate_threshold: float = LINEAR_RATE_THRESHOLD,
                        tail_fraction: float = TAIL_FRACTION) -> TrichotomyVerdict:
    """Finite-sample guess at which of the three asymptotic regimes holds.

    This is a heuristic: no finite orbit decides the trichotomy.  The orbit
    counts as unbounded when its norm exceeds ``bounded_norm_cap`` or keeps
    growing without saturating (growth over ``[N/2, N]`` at least
    ``GROWTH_RATIO_MIN`` times that over ``[N/4, N/2]``).  Unbounded growth
    is linear when the ``v`` estimate exceeds ``linear_rate_threshold`` and
    the local growth exponent ``log2`` of that ratio is near one.
    """
    N = orbit.n_steps
    w = growth_window if growth_window is not None else max(1, N // 10)
    if N < 16 or 2 * w > len(orbit):
        raise OrbitTooShort(f"{len(orbit)} records are too few for a growth window of {w}")
    cap = bounded_norm_cap if bounded_norm_cap is not None else 1e3 * (1.0 + orbit.norms[0])
    norms = orbit.norms
    tail_max, prev_max = float(norms[-w:].max()), float(norms[-2 * w:-w].max())
    growing = tail_max > prev_max + 1e-12 * (1.0 + prev_max)
    g_late = norms[N] - norms[N // 2]
    g_early = norms[N // 2] - norms[N // 4]
    if g_early > 0.0:
        ratio = g_late / g_early
    else:
        ratio = math.inf if g_late > 0.0 else 0.0
    exponent = math.log2(ratio) if 0.0 < ratio < math.inf else (math.inf if ratio > 0 else -math.inf)
    unbounded = tail_max > cap or (growing and ratio >= GROWTH_RATIO_MIN)
    v = estimate_v(orbit, tail_fraction)
    tail = _tail_slice(orbit, tail_fraction)
    n_idx = np.arange(len(orbit))[tail]
    diagnostics = {
        "final_norm": float(norms[N]),
        "max_tail_norm": tail_max,
        "norm_over_n_tail": float(np.mean(norms[tail] / n_idx)),
        "residual_tail": float(np.linalg.norm(orbit.steps[N])),
        "growth_ratio": float(ratio),
        "local_exponent": float(exponent),
    }
    thresholds = {
        "bounded_norm_cap": float(cap),
        "growth_window": int(w),
        "linear_rate_threshold": float(linear_rate_threshold),
        "tail_fraction": float(tail_fraction),
        "growth_ratio_min": GROWTH_RATIO_MIN,
        "linear_exponent_min": LINEAR_EXPONENT_MIN,
    }
    if unbounded:
        if np.linalg.norm(v) > linear_rate_threshold and exponent >= LINEAR_EXPONENT_MIN:
            case = Trichotomy.LINEAR
        else:
            case = Trichotomy.SUBLINEAR
    elif not growing:
        case = Trichotomy.BOUNDED
        v = np.zeros(orbit.dim)
    else:
        case = Trichotomy.UNDETERMINED
    return TrichotomyVerdict(case, v, diagnostics, thresholds)


@dataclass(frozen=True, eq=False)
class CosmicDetection:
    limit: Optional[np.ndarray]
    window_directions: np.ndarray
    spread: float
    final_direction: Optional[np.ndarray]


def detect_cosmic_limit(orbit: Orbit, window: int = DETECT_WINDOW, dir_tol: float = DIR_TOL) -> CosmicDetection:
    """Final ``Q_n`` if the last ``window`` directions are pairwise ``dir_tol``-close.

    Closeness is the Poincaré distance between directions, i.e. the Euclidean
    distance of the unit representers.  The window directions are returned
    either way as a cluster-point summary.
    """
    has = orbit.has_q
    final = orbit.qs[-1].copy() if has[-1] else None
    k = min(window, len(orbit))
    Q = orbit.qs[-k:][has[-k:]]
    if k < window or Q.shape[0] < window:
        return CosmicDetection(None, Q, math.nan, final)
    diff = Q[:, None, :] - Q[None, :, :]
    spread = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
    limit = final if spread < dir_tol else None
    return CosmicDetection(limit, Q, spread, final)


@dataclass(frozen=True, eq=False)
class OneDVerdict:
    sign: str  # "PlusOne" | "MinusOne"
    certificate: dict
    orbit: Orbit


def monotonicity_certificate(orbit: Orbit, fp_tol: float = 1e-14) -> OneDVerdict:
    """Escape direction of a one-dimensional orbit, with its step-sign certificate.

    A step of size at most ``fp_tol``, or a change of sign between steps
    (which brackets a fixed point), raises :class:`FixedPointDetected`.
    """
    if orbit.dim != 1:
        raise DimensionMismatch(f"one-dimensional orbit expected, got dimension {orbit.dim}")
    steps = orbit.steps[1:, 0]
    small = np.flatnonzero(np.abs(steps) <= fp_tol)
    if small.size:
        raise FixedPointDetected(f"|T x_k - x_k| <= {fp_tol!r} at k = {int(small[0])}")
    up = steps[0] > 0.0
    flips = np.flatnonzero((steps > 0.0) != up)
    if flips.size:
        raise FixedPointDetected(f"displacement changes sign at k = {int(flips[0])}")
    cert = {
        "min_step": float(steps.min()),
        "max_step": float(steps.max()),
        "strictly_monotone": True,
        "n_steps": orbit.n_steps,
    }
    return OneDVerdict("PlusOne" if up else "MinusOne", cert, orbit)


def classify_1d(T: Operator, x0, n_steps: int, fp_tol: float = 1e-14) -> OneDVerdict:
    """Iterate a map on the line and certify the direction it escapes in."""
    if T.dim != 1:
        raise DimensionMismatch(f"one-dimensional operator expected, got dimension {T.dim}")
    return monotonicity_certificate(iterate(T, x0, n_steps), fp_tol)


@dataclass(frozen=True, eq=False)
class APResult:
    """Alternating projections ``a_{n+1} = P_A b_n``, ``b_{n+1} = P_B a_{n+1}``.

    ``a[0]`` is NaN: the recursion starts from ``b_0``.
    """

    a: np.ndarray
    orbit: Orbit
    gap_estimate: np.ndarray
    cone_analysis: Optional[ConeAnalysis] = field(default=None)

    @property
    def b(self) -> np.ndarray:
        return self.orbit.xs


def cone_analysis_for(A, B) -> Optional[ConeAnalysis]:
    """Exact cone analysis for planar pairs whose recession cones are known."""
    if A.dim != 2 or B.dim != 2:
        return None
    try:
        return ConeAnalysis.from_recession_cones(A.recession_cone_2d(), B.recession_cone_2d())
    except (NotImplementedError, AttributeError):
        return None


def alternating_projections(A, B, b0, n_steps: int, zero_tol: float = ZERO_TOL,
                            proj_tol: float = 1e-12) -> APResult:
    if A.dim != B.dim:
        raise DimensionMismatch("sets live in different dimensions")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    b = as_vector(b0, A.dim)
    a_hist = np.full((n_steps + 1, A.dim), np.nan)
    b_hist = np.empty((n_steps + 1, A.dim))
    b_hist[0] = b
    for n in range(1, n_steps + 1):
        try:
            a = project(A, b, proj_tol)
            b = project(B, a, proj_tol)
        except CosmicError as exc:
            exc.step = n
            raise
        a_hist[n], b_hist[n] = a, b
    return APResult(a_hist, Orbit(b_hist, zero_tol), b_hist[-1] - a_hist[-1], cone_analysis_for(A, B))
