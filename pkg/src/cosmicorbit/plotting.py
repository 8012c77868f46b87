"""SVG figures: planar phase portraits and convergence trends.

Figures are rendered with matplotlib's object API (no pyplot state) under a
fixed hash salt and without a date stamp, so identical inputs give
byte-identical SVG.  Artists carry stable ids: ``orbit-b`` (iterates, red),
``orbit-a`` (shadow iterates of alternating projections, blue),
``limit-arrow`` (detected limit direction) and ``set-<k>`` (set outlines).
"""
from __future__ import annotations

import io
from typing import Optional

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle, FancyArrowPatch, Polygon, Rectangle

from .cones import PolyhedronH
from .errors import UnsupportedDimension
from .operators import AffineSubspace, Ball, Box, EpigraphReciprocal, Halfspace, Hyperplane

MAX_POINTS = 4000
HEAD_POINTS = 1000
RC = {"svg.hashsalt": "cosmicorbit", "svg.fonttype": "none", "font.size": 9}


def plot_indices(n_records: int) -> np.ndarray:
    """All indices for short orbits; otherwise a head block plus a log-spaced tail."""
    if n_records <= MAX_POINTS:
        return np.arange(n_records)
    tail = np.geomspace(HEAD_POINTS, n_records - 1, MAX_POINTS - HEAD_POINTS).astype(int)
    return np.unique(np.concatenate([np.arange(HEAD_POINTS), tail, [n_records - 1]]))


def viewport(*arrays) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of all finite points plus a 10% margin."""
    pts = np.vstack([a[np.all(np.isfinite(a), axis=1)] for a in arrays if a is not None])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = hi - lo
    pad = np.where(span > 0, 0.1 * span, 0.5 * np.maximum(1.0, np.abs(lo)))
    return lo - pad, hi + pad


def clip_halfplane(poly: list, u, eta: float) -> list:
    """Sutherland-Hodgman clip of a polygon against ``<u, x> <= eta``."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        sp, sq = float(u @ p) - eta, float(u @ q) - eta
        if sp <= 0:
            out.append(p)
        if sp * sq < 0:
            out.append(p + (sp / (sp - sq)) * (q - p))
    return out


def _rect(lo, hi, grow=0.0):
    d = (hi - lo) * grow
    lo, hi = lo - d, hi + d
    return [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]), np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]


def _line_through(ax, u, eta, lo, hi, gid, color):
    u = np.asarray(u, dtype=float)
    p0 = eta * u / float(u @ u)
    t = np.array([-u[1], u[0]]) / np.linalg.norm(u)
    L = 2.0 * float(np.linalg.norm(hi - lo)) + float(np.linalg.norm(p0 - lo))
    a, b = p0 - L * t, p0 + L * t
    ax.plot([a[0], b[0]], [a[1], b[1]], color=color, lw=1.2, gid=gid)


def draw_set(ax, S, lo, hi, k: int, color: str):
    gid = f"set-{k}"
    face = dict(facecolor=color, alpha=0.15, edgecolor=color, lw=1.2, gid=gid)
    if isinstance(S, (Halfspace, PolyhedronH)):
        rows = [(S.u, S.eta)] if isinstance(S, Halfspace) else list(zip(S.normals, S.offsets))
        poly = _rect(lo, hi, 0.5)
        for u, eta in rows:
            poly = clip_halfplane(poly, np.asarray(u), float(eta))
        if len(poly) >= 3:
            ax.add_patch(Polygon(np.array(poly), closed=True, **face))
    elif isinstance(S, Hyperplane):
        _line_through(ax, S.u, S.eta, lo, hi, gid, color)
    elif isinstance(S, Box):
        ax.add_patch(Rectangle(S.lo, *(S.hi - S.lo), **face))
    elif isinstance(S, Ball):
        ax.add_patch(Circle(S.center, S.radius, **face))
    elif isinstance(S, EpigraphReciprocal):
        y_top = max(hi[1], S.c / max(hi[0], 1e-12)) + (hi[1] - lo[1])
        x_right = hi[0] + (hi[0] - lo[0])
        t = np.geomspace(S.c / y_top, max(x_right, S.c / y_top * 2), 400)
        curve = np.column_stack([t, S.c / t])
        region = np.vstack([curve, [[x_right, y_top], [t[0], y_top]]])
        ax.add_patch(Polygon(region, closed=True, **face))
    elif isinstance(S, AffineSubspace):
        q = S._q
        if q.shape[1] == 0:
            ax.plot([S.offset[0]], [S.offset[1]], "s", color=color, gid=gid)
        elif q.shape[1] == 1:
            n = np.array([-q[1, 0], q[0, 0]])
            _line_through(ax, n, float(n @ S.offset), lo, hi, gid, color)


def _render(fig: Figure) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def emit_svg(title: str, b: np.ndarray, a: Optional[np.ndarray] = None, sets=(),
             limit: Optional[np.ndarray] = None) -> str:
    """Planar phase portrait of an orbit ``b`` (red), optional shadow ``a`` (blue).

    ``sets`` are drawn as shaded regions or lines; ``limit`` as an arrow from
    the centre of the view.  Long orbits are thinned by :func:`plot_indices`.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2:
        raise UnsupportedDimension("phase portraits need planar orbits")
    lo, hi = viewport(b, a)
    idx = plot_indices(b.shape[0])
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(6.0, 4.5))
        ax = fig.add_subplot()
        for k, (S, color) in enumerate(sets):
            draw_set(ax, S, lo, hi, k, color)
        if a is not None:
            aa = a[idx]
            aa = aa[np.all(np.isfinite(aa), axis=1)]
            ax.scatter(aa[:, 0], aa[:, 1], s=7, c="blue", linewidths=0, gid="orbit-a", zorder=3,
                       label="shadow iterates")
        ax.scatter(b[idx, 0], b[idx, 1], s=7, c="red", linewidths=0, gid="orbit-b", zorder=4,
                   label="iterates")
        if limit is not None:
            center = 0.5 * (lo + hi)
            L = 0.4 * float(np.min(hi - lo))
            u = np.asarray(limit, dtype=float)
            ax.add_patch(FancyArrowPatch(tuple(center), tuple(center + L * u / np.linalg.norm(u)),
                                         arrowstyle="-|>", mutation_scale=14, color="black",
                                         lw=1.5, zorder=5, gid="limit-arrow"))
        ax.set_xlim(lo[0], hi[0])
        ax.set_ylim(lo[1], hi[1])
        ax.set_xlabel(r"$\xi_1$")
        ax.set_ylabel(r"$\xi_2$")
        ax.set_title(title)
        ax.legend(loc="upper left", frameon=False)
        fig.tight_layout()
        return _render(fig)


def emit_trend_svg(title: str, norms: np.ndarray, qs: np.ndarray, reference: Optional[np.ndarray] = None) -> str:
    """Norm growth and distance of ``Q_n`` to a reference direction, both on log axes.

    Without a reference the final direction is used.
    """
    n = np.arange(norms.size)
    idx = plot_indices(norms.size)
    idx = idx[idx >= 1]
    ok = np.all(np.isfinite(qs), axis=1)
    if reference is None:
        reference = qs[ok][-1] if ok.any() else None
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(6.0, 6.0))
        ax1, ax2 = fig.subplots(2, 1)
        sel = idx[norms[idx] > 0]
        ax1.loglog(n[sel], norms[sel], color="red", lw=1.2, gid="trend-norm")
        ax1.set_ylabel(r"$\|x_n\|$")
        ax1.set_title(title)
        if reference is not None:
            ref = np.asarray(reference, dtype=float)
            ref = ref / np.linalg.norm(ref)
            dist = np.linalg.norm(qs - ref, axis=1)
            sel = idx[ok[idx] & (dist[idx] > 0)]
            if sel.size:
                ax2.loglog(n[sel], dist[sel], color="black", lw=1.2, gid="trend-direction")
        for ax in (ax1, ax2):
            ax.minorticks_off()  # log axes spanning many decades otherwise spawn thousands of ticks
        ax2.set_xlabel("n")
        ax2.set_ylabel(r"$\|Q_n - u\|$")
        fig.tight_layout()
        return _render(fig)
