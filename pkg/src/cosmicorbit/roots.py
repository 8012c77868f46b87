"""Bracketed scalar root finding: Newton steps safeguarded by bisection."""
from __future__ import annotations

import math
from typing import Callable, Optional

from .errors import BracketFailure, NoConvergence

MAX_DOUBLINGS = 200


def grow_bracket(g: Callable[[float], float], x0: float, lo: float = -math.inf, hi: float = math.inf,
                 max_doublings: int = MAX_DOUBLINGS):
    """Find ``a < b`` inside the open interval ``(lo, hi)`` with ``g(a) < 0 < g(b)``.

    ``g`` must be increasing.  Starting from ``x0`` the search moves away by a
    doubling step, or halves the distance to a finite domain end.
    Returns ``(a, g(a), b, g(b))``.
    """
    g0 = g(x0)
    if g0 == 0.0:
        return x0, g0, x0, g0
    toward_hi = g0 < 0.0
    end = hi if toward_hi else lo
    step = 1.0
    a, ga = x0, g0
    for k in range(1, max_doublings + 1):
        if math.isfinite(end):
            p = end + (x0 - end) * 0.5 ** k
        else:
            p = x0 + step if toward_hi else x0 - step
            step *= 2.0
        gp = g(p)
        if (gp > 0.0) == toward_hi or gp == 0.0:
            return (a, ga, p, gp) if toward_hi else (p, gp, a, ga)
        a, ga = p, gp
    raise BracketFailure(f"no sign change found within {max_doublings} doublings from {x0!r}")


def safeguarded_newton(g: Callable[[float], float], dg: Optional[Callable[[float], float]],
                       lo: float, glo: float, hi: float, ghi: float, tol: float,
                       x0: Optional[float] = None, max_iter: int = 200) -> float:
    """Root of increasing ``g`` in ``[lo, hi]`` with ``g(lo) <= 0 <= g(hi)``.

    Stops on the residual, ``|g(x)| <= tol``.  A Newton step that leaves the
    current bracket, or is unavailable (``dg is None``), is replaced by a
    bisection (secant when no derivative is given).
    """
    if abs(glo) <= tol:
        return lo
    if abs(ghi) <= tol:
        return hi
    x = x0 if x0 is not None and lo < x0 < hi else 0.5 * (lo + hi)
    for _ in range(max_iter):
        gx = g(x)
        if abs(gx) <= tol:
            return x
        if gx < 0.0:
            lo, glo = x, gx
        else:
            hi, ghi = x, gx
        xn = math.nan
        if dg is not None:
            d = dg(x)
            if d > 0.0:
                xn = x - gx / d
        elif ghi != glo:
            xn = lo - glo * (hi - lo) / (ghi - glo)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x or hi - lo <= 4.0 * 2.2e-16 * max(abs(lo), abs(hi)):
            best = lo if abs(glo) < abs(ghi) else hi
            if min(abs(glo), abs(ghi)) <= tol:
                return best
            raise NoConvergence(f"bracket collapsed at {best!r} with residual {min(abs(glo), abs(ghi))!r}")
        x = xn
    raise NoConvergence(f"no root to tolerance {tol!r} after {max_iter} iterations")
