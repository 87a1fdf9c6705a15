"""Panelised Gauss-Legendre quadrature with diagonal-aware double integrals.

All verification maths in this package reduces to 1-D integrals against a
density and 2-D integrals of kernels that are smooth except along the line
x = y (and along atom lines, which panel boundaries absorb).  The scheme here
is deliberately plain: a partition of the truncated domain into panels, a
fixed Gauss-Legendre rule per panel, and an explicit split of every diagonal
cell into its two triangles so the rule never integrates across the kink.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

DEFAULT_PANELS = 32
DEFAULT_POINTS = 64
TRUNCATION_EPS = 1e-10


@lru_cache(maxsize=32)
def _unit_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [0, 1]."""
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


# ---------- panel partitions ----------


def build_partition(lo: float, hi: float, knots=(), n_panels: int = DEFAULT_PANELS) -> np.ndarray:
    """Panel boundaries on [lo, hi]: interior knots become cuts, then every
    segment wider than (hi-lo)/n_panels is subdivided uniformly.

    Knots outside the open interval are dropped, so truncation and knot lists
    compose without special cases.
    """
    if not hi > lo:
        raise ValueError(f"empty integration interval [{lo}, {hi}]")
    cuts = sorted({float(lo), float(hi), *(float(k) for k in knots if lo < k < hi)})
    max_w = (hi - lo) / n_panels
    bounds = [cuts[0]]
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(np.ceil((b - a) / max_w - 1e-12)))
        bounds.extend(a + (b - a) * np.arange(1, m + 1) / m)
    return np.asarray(bounds)


@dataclass(frozen=True)
class QuadratureScheme:
    """Knobs for the quadrature backend.

    n_panels         baseline panel count per axis (knots only refine it)
    points_per_panel Gauss-Legendre points on each panel
    truncation_eps   quantile level used to truncate unbounded supports
    knots            standing discontinuity knots (atoms, support endpoints)
    """

    n_panels: int = DEFAULT_PANELS
    points_per_panel: int = DEFAULT_POINTS
    truncation_eps: float = TRUNCATION_EPS
    knots: tuple[float, ...] = ()

    def partition(self, lo: float, hi: float, extra_knots=()) -> np.ndarray:
        return build_partition(lo, hi, (*self.knots, *extra_knots), self.n_panels)

    def rule(self, lo: float, hi: float, extra_knots=()) -> "PanelRule":
        return PanelRule.from_partition(self.partition(lo, hi, extra_knots), self.points_per_panel)


@dataclass(frozen=True)
class PanelRule:
    """Concrete nodes and weights over a panel partition."""

    boundaries: np.ndarray
    points_per_panel: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def from_partition(cls, boundaries: np.ndarray, points_per_panel: int = DEFAULT_POINTS) -> "PanelRule":
        xr, wr = _unit_rule(points_per_panel)
        a = boundaries[:-1]
        h = np.diff(boundaries)
        nodes = (a[:, None] + h[:, None] * xr[None, :]).ravel()
        weights = (h[:, None] * wr[None, :]).ravel()
        return cls(boundaries=boundaries, points_per_panel=points_per_panel, nodes=nodes, weights=weights)

    @property
    def n_panels(self) -> int:
        return len(self.boundaries) - 1

    def integrate(self, f) -> float | complex:
        return np.dot(self.weights, f(self.nodes))


def integrate_function(f, lo, hi, knots=(), scheme: QuadratureScheme | None = None):
    """One-off 1-D integral of f over [lo, hi]."""
    scheme = scheme or QuadratureScheme()
    return scheme.rule(lo, hi, knots).integrate(f)


def integrate_tail(f, x0: float, scale: float = 1.0, side: int = +1, n_panels: int = 8,
                   points_per_panel: int = DEFAULT_POINTS):
    """Integral of f over the half-line beyond x0 via x = x0 +/- scale*t/(1-t).

    Intended for integrands that decay faster than any polynomial (density
    tails); the rational map compresses the half-line onto [0, 1) and the
    panel rule never evaluates at t = 1.
    """
    rule = PanelRule.from_partition(build_partition(0.0, 1.0, n_panels=n_panels), points_per_panel)
    t = rule.nodes
    x = x0 + side * scale * t / (1.0 - t)
    jac = scale / (1.0 - t) ** 2
    vals = np.nan_to_num(f(x) * jac, nan=0.0)
    return np.dot(rule.weights, vals)


# ---------- diagonal-split double integrals ----------


def _triangle_points(t0: float, t1: float, n: int):
    """Quadrature points for both triangles of the cell [t0,t1]^2.

    Returns flat (x, y, w) arrays; the inner coordinate is rescaled per outer
    node so nodes stay strictly on one side of the diagonal.
    """
    xr, wr = _unit_rule(n)
    h = t1 - t0
    xo = t0 + h * xr
    wo = h * wr
    x = np.repeat(xo, n)
    # lower triangle: y in [t0, x]
    y_lo = (t0 + (xo[:, None] - t0) * xr[None, :]).ravel()
    w_lo = (wo[:, None] * ((xo[:, None] - t0) * wr[None, :])).ravel()
    # upper triangle: y in [x, t1]
    y_hi = (xo[:, None] + (t1 - xo[:, None]) * xr[None, :]).ravel()
    w_hi = (wo[:, None] * ((t1 - xo[:, None]) * wr[None, :])).ravel()
    return np.concatenate([x, x]), np.concatenate([y_lo, y_hi]), np.concatenate([w_lo, w_hi])


def double_integral(g, boundaries: np.ndarray, points_per_panel: int = DEFAULT_POINTS):
    """Integral of g over the square spanned by `boundaries` on both axes.

    Tensor-product Gauss-Legendre everywhere except the diagonal cells, which
    are re-integrated triangle by triangle.  g must accept broadcast arrays.
    """
    rule = PanelRule.from_partition(boundaries, points_per_panel)
    x, w = rule.nodes, rule.weights
    G = g(x[:, None], x[None, :])
    total = w @ G @ w
    n = points_per_panel
    for k in range(rule.n_panels):
        sl = slice(k * n, (k + 1) * n)
        total -= w[sl] @ G[sl, sl] @ w[sl]
        tx, ty, tw = _triangle_points(boundaries[k], boundaries[k + 1], n)
        total += np.dot(tw, g(tx, ty))
    return total


def double_integral_rect(g, boundaries: np.ndarray, ax: tuple[float, float], bx: tuple[float, float],
                         points_per_panel: int = DEFAULT_POINTS):
    """Integral of g over the rectangle ax x bx.

    Both edge intervals are carved out of the same global partition (after
    inserting their endpoints), so any cell crossed by the diagonal is an
    exact square and gets the triangle treatment.
    """
    cuts = np.asarray(sorted({*boundaries.tolist(), *ax, *bx}))
    segs = list(zip(cuts[:-1], cuts[1:]))
    segs_a = [s for s in segs if s[0] >= ax[0] - 1e-15 and s[1] <= ax[1] + 1e-15]
    segs_b = [s for s in segs if s[0] >= bx[0] - 1e-15 and s[1] <= bx[1] + 1e-15]
    if not segs_a or not segs_b:
        return 0.0
    xr, wr = _unit_rule(points_per_panel)

    def seg_rule(seg):
        a, b = seg
        return a + (b - a) * xr, (b - a) * wr

    xa = np.concatenate([seg_rule(s)[0] for s in segs_a])
    wa = np.concatenate([seg_rule(s)[1] for s in segs_a])
    xb = np.concatenate([seg_rule(s)[0] for s in segs_b])
    wb = np.concatenate([seg_rule(s)[1] for s in segs_b])
    total = wa @ g(xa[:, None], xb[None, :]) @ wb
    shared = [s for s in segs_a if s in segs_b]
    n = points_per_panel
    for seg in shared:
        ia = segs_a.index(seg) * n
        ib = segs_b.index(seg) * n
        total -= wa[ia:ia + n] @ g(xa[ia:ia + n, None], xb[None, ib:ib + n]) @ wb[ib:ib + n]
        tx, ty, tw = _triangle_points(seg[0], seg[1], n)
        total += np.dot(tw, g(tx, ty))
    return total


class BilinearKernelForm:
    """Precomputed functional (fx, fy) -> integral fx(x) fy(y) K(x, y) dx dy.

    The kernel is sampled once on the panel grid (diagonal cells masked out)
    and once on the triangle points, after which each pair evaluation is a
    vector-matrix-vector product.  `apply_many` batches whole function
    families through a single pair of matrix products.
    """

    def __init__(self, kernel, boundaries: np.ndarray, points_per_panel: int = DEFAULT_POINTS):
        rule = PanelRule.from_partition(boundaries, points_per_panel)
        x, w = rule.nodes, rule.weights
        M = kernel(x[:, None], x[None, :]) * np.outer(w, w)
        n = points_per_panel
        tri_x, tri_y, tri_w = [], [], []
        for k in range(rule.n_panels):
            sl = slice(k * n, (k + 1) * n)
            M[sl, sl] = 0.0
            tx, ty, tw = _triangle_points(boundaries[k], boundaries[k + 1], n)
            tri_x.append(tx)
            tri_y.append(ty)
            tri_w.append(tw * kernel(tx, ty))
        self.rule = rule
        self.matrix = M
        self.tri_x = np.concatenate(tri_x)
        self.tri_y = np.concatenate(tri_y)
        self.tri_wk = np.concatenate(tri_w)

    def apply(self, fx, fy) -> float | complex:
        a = fx(self.rule.nodes)
        b = fy(self.rule.nodes)
        return a @ self.matrix @ b + np.dot(self.tri_wk, fx(self.tri_x) * fy(self.tri_y))

    def apply_many(self, fns_x, fns_y) -> np.ndarray:
        """Matrix of pair values for two function families."""
        A = np.column_stack([f(self.rule.nodes) for f in fns_x])
        B = np.column_stack([f(self.rule.nodes) for f in fns_y])
        TA = np.column_stack([f(self.tri_x) for f in fns_x])
        TB = np.column_stack([f(self.tri_y) for f in fns_y])
        return A.T @ self.matrix @ B + (TA * self.tri_wk[:, None]).T @ TB

    def total(self) -> float:
        return self.apply(np.ones_like, np.ones_like)
