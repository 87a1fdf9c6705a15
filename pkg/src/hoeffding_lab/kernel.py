"""The Hoeffding kernel surface H(x, y) = F(min)(1 - F(max)) of a 1-D law.

H is the density of the Hoeffding measure of the law: the measure whose total
mass is the variance and whose double integrals against u'(x) v'(y) reproduce
covariances.  Everything here works off the cdf alone, so atomic laws get the
correct piecewise-constant surface for free.
"""

from __future__ import annotations

import numpy as np

from .dist import Distribution
from .errors import NegativeRadicand
from .quadrature import (BilinearKernelForm, QuadratureScheme, build_partition,
                         double_integral_rect)

PSD_TOL_PER_DIM = 1e-10     # Gram eigenvalue floor is -PSD_TOL_PER_DIM * dim
FOURIER_TOL = 1e-6          # closed form vs quadrature agreement
FREQUENCY_LIMIT = 50.0      # validated range for the transform arguments
_RADICAND_CLAMP = -1e-12    # pseudometric radicand below this is an error


class KernelSurface:
    """Kernel surface of one source law, with cached quadrature forms."""

    def __init__(self, source: Distribution):
        self.source = source
        self._forms: dict = {}

    # ---------- pointwise surface ----------

    def __call__(self, x, y):
        """H(x, y); monotonicity of F turns min/max of points into min/max
        of cdf values, which vectorises cleanly."""
        fx = np.asarray(self.source.cdf(x))
        fy = np.asarray(self.source.cdf(y))
        out = np.minimum(fx, fy) * (1.0 - np.maximum(fx, fy))
        if out.ndim == 0:
            return float(out)
        return out

    def grid(self, xs, ys) -> np.ndarray:
        """Matrix H[i, j] = H(xs[i], ys[j])."""
        fx = np.asarray(self.source.cdf(np.asarray(xs, dtype=float)))
        fy = np.asarray(self.source.cdf(np.asarray(ys, dtype=float)))
        return np.minimum.outer(fx, fy) * (1.0 - np.maximum.outer(fx, fy))

    def gram_matrix(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.grid(pts, pts)

    def pseudometric(self, x, y) -> float:
        """d(x, y) = sqrt(H(x,x) - 2 H(x,y) + H(y,y)).

        Rounding can push the radicand a hair negative; within -1e-14 it is
        clamped to zero, below -1e-12 it is reported as a contract breach.
        """
        rad = self(x, x) - 2.0 * self(x, y) + self(y, y)
        if rad < _RADICAND_CLAMP:
            raise NegativeRadicand(f"pseudometric radicand {rad:.3e} at ({x}, {y})")
        return float(np.sqrt(max(rad, 0.0)))

    # ---------- integral quantities ----------

    def partition(self, extra_knots=(), truncation_eps: float | None = None,
                  scheme: QuadratureScheme | None = None) -> np.ndarray:
        scheme = scheme or QuadratureScheme()
        lo, hi = self.source.truncated_support(truncation_eps)
        return build_partition(lo, hi, (*self.source.kernel_knots(), *extra_knots), scheme.n_panels)

    def bilinear_form(self, extra_knots=(), truncation_eps: float | None = None,
                      scheme: QuadratureScheme | None = None) -> BilinearKernelForm:
        """(fx, fy) -> integral fx(x) fy(y) H(x, y) dx dy, built once and
        cached per knot set."""
        scheme = scheme or QuadratureScheme()
        key = (tuple(sorted(set(extra_knots))), truncation_eps,
               scheme.n_panels, scheme.points_per_panel)
        if key not in self._forms:
            if len(self._forms) >= 4:  # keep the cache small; forms are large
                self._forms.pop(next(iter(self._forms)))
            bounds = self.partition(extra_knots, truncation_eps, scheme)
            self._forms[key] = BilinearKernelForm(self.grid_fn(), bounds, scheme.points_per_panel)
        return self._forms[key]

    def grid_fn(self):
        def eval_kernel(x, y):
            fx = np.asarray(self.source.cdf(x))
            fy = np.asarray(self.source.cdf(y))
            return np.minimum(fx, fy) * (1.0 - np.maximum(fx, fy))
        return eval_kernel

    def total_mass(self) -> float:
        """Mass of the Hoeffding measure = Var(X) (checked against moments
        elsewhere; here it is the honest double integral)."""
        self.source.variance()  # raises DivergentMoment for heavy tails
        lo, hi = self.source.truncated_support()
        if not hi > lo:
            return 0.0
        return float(self.bilinear_form().total())

    def rectangle_mass(self, ax: tuple[float, float], bx: tuple[float, float]) -> float:
        """Hoeffding measure of the rectangle ax x bx."""
        lo, hi = self.source.truncated_support()
        a = (max(ax[0], lo), min(ax[1], hi))
        b = (max(bx[0], lo), min(bx[1], hi))
        if a[1] <= a[0] or b[1] <= b[0]:
            return 0.0
        return float(double_integral_rect(self.grid_fn(), self.partition(), a, b))

    # ---------- Fourier transform of the Hoeffding measure ----------

    def fourier(self, t: float, s: float):
        """Transform at (t, s): closed form (f(t) f(s) - f(t+s)) / (t s) when
        both frequencies are nonzero, quadrature on the zero lines."""
        self._check_frequency(t, s)
        if t != 0.0 and s != 0.0:
            f = self.source.characteristic_function
            return complex((f(t) * f(s) - f(t + s)) / (t * s))
        return self.fourier_by_quadrature(t, s)

    def fourier_by_quadrature(self, t: float, s: float):
        """Transform at (t, s) as the double integral of e^{i(tx+sy)} H."""
        self._check_frequency(t, s)
        form = self.bilinear_form()
        return complex(form.apply(lambda x: np.exp(1j * t * x), lambda y: np.exp(1j * s * y)))

    @staticmethod
    def _check_frequency(t: float, s: float) -> None:
        if abs(t) > FREQUENCY_LIMIT or abs(s) > FREQUENCY_LIMIT:
            raise ValueError(f"frequencies ({t}, {s}) outside validated range "
                             f"|t|, |s| <= {FREQUENCY_LIMIT:g}")


def kernel_eval(d: Distribution, x, y):
    """Convenience: H_d(x, y) without keeping a surface around."""
    return KernelSurface(d)(x, y)
