"""Periodic mixing measures on the unit square.

For a source law mu on [0,1) with variance sigma^2 and any prescribed c, the
covariance of 1-periodic smooth functions is represented by the signed
measure

    lambda = lambda_mu + (sigma^2 - c) m x m + c (mu x m + m x mu)
             - (Lambda_mu x m + m x Lambda_mu),

where m is Lebesgue measure on [0,1), lambda_mu the Hoeffding measure and
Lambda_mu its one-dimensional marginal.  The measure is kept in this
structured five-component form: tensor components integrate as products of
one-dimensional integrals and only the Hoeffding part ever needs a double
quadrature.  For sources with a density p the measure has the density

    psi(x, y) = H(x, y) + (sigma^2 - c) + c (p(x) + p(y)) - (h(x) + h(y)),

whose nonnegativity as a function of c is what the threshold and
sufficient-c analyses below are about.
"""

from __future__ import annotations

import numpy as np

from .dist import Distribution
from .errors import (AlphaTooSmall, DensityBelowAlpha, NoDensity,
                     NonPeriodicFunction, UnsupportedSupport)
from .kernel import KernelSurface
from .marginal import marginal_density_from_tail_moment
from .oracle import TestFunction, direct_covariance
from .quadrature import QuadratureScheme, double_integral_rect

PERIODICITY_TOL = 1e-12
THRESHOLD_GRID = 400        # inner oracle: psi minimum over this midpoint grid
THRESHOLD_TOL = 1e-6        # bisection tolerance in c
PSI_SLACK = -1e-9           # grid minimum above this counts as nonnegative
_RECT_POINTS = 32           # per-cell order for interval-mass rectangles
_SUPPORT_SLACK = 1e-12


def _require_unit_support(d: Distribution) -> None:
    at = d.atoms()
    if at is not None:
        locs = np.asarray(at[0], dtype=float)
        if np.any(locs < 0.0) or np.any(locs >= 1.0):
            raise UnsupportedSupport(f"{d.kind} law has atoms outside [0,1)")
        return
    lo, hi = d.support
    if lo < -_SUPPORT_SLACK or hi > 1.0 + _SUPPORT_SLACK:
        raise UnsupportedSupport(f"{d.kind} law has support ({lo:g}, {hi:g}) "
                                 "extending beyond [0,1)")


def _require_periodic(fn: TestFunction) -> None:
    if abs(float(fn(0.0)) - float(fn(1.0))) > PERIODICITY_TOL or \
            abs(float(fn.du(0.0)) - float(fn.du(1.0))) > PERIODICITY_TOL:
        raise NonPeriodicFunction(f"{fn.name} is not 1-periodic "
                                  "(values or derivatives differ at 0 and 1)")


def _lebesgue_rule(knots=()):
    return QuadratureScheme().rule(0.0, 1.0, extra_knots=tuple(k for k in knots if 0.0 < k < 1.0))


# ---------- the structured measure ----------


class MixingMeasure:
    """Five-component periodic mixing measure of one source law.

    Immutable after construction; integration distributes over the
    components, so tensor parts cost one-dimensional quadratures and only
    the Hoeffding part is ever integrated in two dimensions.
    """

    def __init__(self, source: Distribution, c: float):
        _require_unit_support(source)
        self.source = source
        self.c = float(c)
        self.mean = source.mean()
        self.variance = source.variance()
        self.surface = KernelSurface(source)
        self._form = None
        self._partition = self.surface.partition(extra_knots=(0.0, 1.0))

    def __repr__(self):
        return f"MixingMeasure(source={self.source.spec()!r}, c={self.c!r})"

    # ----- component integrals against derivatives -----

    @property
    def form(self):
        if self._form is None:
            self._form = self.surface.bilinear_form(extra_knots=(0.0, 1.0))
        return self._form

    def _du_lebesgue(self, fn: TestFunction) -> float:
        rule = _lebesgue_rule(fn.knots)
        return float(np.dot(rule.weights, np.asarray(fn.du(rule.nodes), dtype=float)))

    def _du_source(self, fn: TestFunction) -> float:
        return float(self.source.expectation(fn.du, knots=fn.knots))

    def _du_marginal(self, fn: TestFunction) -> float:
        """integral of u' against Lambda_mu, collapsed to one expectation:
        int u'(x) h(x) dx = E (X - a)(u(X) - u(0)) by Fubini."""
        a = self.mean
        return float(self.source.expectation(
            lambda y: (np.asarray(y) - a) * (np.asarray(fn(y)) - float(fn(0.0))),
            knots=fn.knots))

    def integrate_pair(self, u: TestFunction, v: TestFunction) -> float:
        """integral of u'(x) v'(y) against the full five-component sum."""
        ku = self.form.apply(u.du, v.du)
        mu_, mv = self._du_lebesgue(u), self._du_lebesgue(v)
        su, sv = self._du_source(u), self._du_source(v)
        lu, lv = self._du_marginal(u), self._du_marginal(v)
        return float(ku + (self.variance - self.c) * mu_ * mv
                     + self.c * (su * mv + mu_ * sv) - (lu * mv + mu_ * lv))

    # ----- interval masses -----

    @staticmethod
    def _overlap(a: float, b: float) -> float:
        return max(0.0, min(b, 1.0) - max(a, 0.0))

    def _mu_interval(self, a: float, b: float) -> float:
        at = self.source.atoms()
        if at is not None:
            locs, wts = at
            return float(np.sum(wts[(locs >= a) & (locs < b)]))
        return float(self.source.cdf(b) - self.source.cdf(a))

    def _marginal_interval(self, a: float, b: float) -> float:
        """Lambda_mu([a,b]) = int_a^b h, collapsed by Fubini to the single
        expectation E (X - mean) clip(min(X, b) - a, 0, b - a)."""
        m = self.mean
        return float(self.source.expectation(
            lambda y: (np.asarray(y) - m) * np.clip(np.minimum(np.asarray(y), b) - a, 0.0, None),
            knots=(a, b)))

    def _kernel_rect(self, ax, bx) -> float:
        return float(double_integral_rect(self.surface.grid_fn(), self._partition,
                                          ax, bx, points_per_panel=_RECT_POINTS))

    def interval_mass(self, ax: tuple[float, float], bx: tuple[float, float]) -> float:
        """Mass of the rectangle ax x bx under the signed measure."""
        a1, a2 = float(ax[0]), float(ax[1])
        b1, b2 = float(bx[0]), float(bx[1])
        la, lb = self._overlap(a1, a2), self._overlap(b1, b2)
        mua, mub = self._mu_interval(a1, a2), self._mu_interval(b1, b2)
        lam_a, lam_b = self._marginal_interval(a1, a2), self._marginal_interval(b1, b2)
        return float(self._kernel_rect((a1, a2), (b1, b2))
                     + (self.variance - self.c) * la * lb
                     + self.c * (mua * lb + la * mub)
                     - (lam_a * lb + la * lam_b))

    def marginal_mass(self, ax: tuple[float, float]) -> float:
        return self.interval_mass(ax, (0.0, 1.0))

    def total_mass(self) -> float:
        return self.interval_mass((0.0, 1.0), (0.0, 1.0))

    # ----- density -----

    def density(self, x, y):
        """psi(x, y) for density sources; symmetric by construction."""
        if self.source.atoms() is not None:
            raise NoDensity(f"{self.source.kind} source is atomic; the mixing "
                            "measure has no density")
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        h_x = np.asarray(marginal_density_from_tail_moment(self.source, xs))
        h_y = np.asarray(marginal_density_from_tail_moment(self.source, ys))
        p_x = np.asarray(self.source.pdf(xs), dtype=float)
        p_y = np.asarray(self.source.pdf(ys), dtype=float)
        val = (self.surface(xs, ys) + (self.variance - self.c)
               + self.c * (p_x + p_y) - (h_x + h_y))
        if np.ndim(val) == 0:
            return float(val)
        return val

    def density_grid(self, xs, ys) -> np.ndarray:
        """psi on the tensor grid xs x ys with one h/p evaluation per
        coordinate."""
        if self.source.atoms() is not None:
            raise NoDensity(f"{self.source.kind} source is atomic; the mixing "
                            "measure has no density")
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        h_x = np.asarray(marginal_density_from_tail_moment(self.source, xs))
        h_y = np.asarray(marginal_density_from_tail_moment(self.source, ys))
        p_x = np.asarray(self.source.pdf(xs), dtype=float)
        p_y = np.asarray(self.source.pdf(ys), dtype=float)
        return (self.surface.grid(xs, ys) + (self.variance - self.c)
                + self.c * (p_x[:, None] + p_y[None, :])
                - (h_x[:, None] + h_y[None, :]))

    # ----- Fourier side -----

    def _fourier_lebesgue(self, n: int) -> complex:
        rule = _lebesgue_rule()
        return complex(np.dot(rule.weights, np.exp(2j * np.pi * n * rule.nodes)))

    def _fourier_source(self, n: int) -> complex:
        return complex(self.source.expectation(lambda y: np.exp(2j * np.pi * n * np.asarray(y))))

    def _fourier_marginal(self, n: int) -> complex:
        a = self.mean
        if n == 0:
            return complex(self.source.expectation(lambda y: (np.asarray(y) - a) * np.asarray(y)))
        w = 2j * np.pi * n
        return complex(self.source.expectation(
            lambda y: (np.asarray(y) - a) * (np.exp(w * np.asarray(y)) - 1.0) / w))

    def fourier_coefficient(self, k: int, l: int) -> complex:
        """lambda-hat(k, l) = integral of e^{2 pi i (kx + ly)} d lambda,
        assembled component by component (each one by quadrature)."""
        kern = self.form.apply(lambda x: np.exp(2j * np.pi * k * x),
                               lambda y: np.exp(2j * np.pi * l * y))
        mk, ml = self._fourier_lebesgue(k), self._fourier_lebesgue(l)
        sk, sl = self._fourier_source(k), self._fourier_source(l)
        lk, ll = self._fourier_marginal(k), self._fourier_marginal(l)
        return complex(kern + (self.variance - self.c) * mk * ml
                       + self.c * (sk * ml + mk * sl) - (lk * ml + mk * ll))


def build_mixing(d: Distribution, c: float) -> MixingMeasure:
    """The mixing measure of a source on [0,1) with prescribed marginal
    multiplier c (marginal of the measure is c times the source law)."""
    return MixingMeasure(d, c)


def mixing_density(mm: MixingMeasure, x, y):
    return mm.density(x, y)


# ---------- closed form for the flat source ----------


def distance_profile(h):
    """D(h) = (1 - 4h(1-h))/8 = (2h-1)^2/8: the part of the flat-source
    mixing density depending only on |x - y|; nonnegative, vanishing only
    at h = 1/2."""
    hs = np.asarray(h, dtype=float)
    out = 0.125 * (1.0 - 4.0 * hs * (1.0 - hs))
    return float(out) if out.ndim == 0 else out


def uniform_mixing_density(c: float, x, y):
    """Closed form D(|x-y|) + (c - 1/24) for the uniform source."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    out = distance_profile(np.abs(xs - ys)) + (c - 1.0 / 24.0)
    return float(out) if np.ndim(out) == 0 else out


def rescale_to_T(mm: MixingMeasure, T: float, x, y):
    """Density of the rescaled measure on (0, T)^2 for the uniform source:
    D(|x - y| / T) + (c - 1/24).

    This is the unit-square density read at (x/T, y/T), which is exactly
    what preserves the covariance identity for T-periodic functions.  Its
    marginal over (0, T) then has constant density c*T with respect to dx
    (the unit-square marginal c picks up one factor of T from the wider
    integration range).
    """
    if mm.source.kind != "uniform" or mm.source.support != (0.0, 1.0):
        raise UnsupportedSupport("rescaling is defined for the uniform source "
                                 f"on (0,1); got {mm.source.spec()}")
    if not T > 0:
        raise ValueError(f"period must be positive, got {T}")
    return uniform_mixing_density(mm.c, np.asarray(x, dtype=float) / T,
                                  np.asarray(y, dtype=float) / T)


# ---------- positivity analysis ----------


def _psi_grid_parts(d: Distribution, grid_n: int):
    """(base, coef) with psi_c = base + c * coef on the midpoint grid."""
    if d.atoms() is not None:
        raise NoDensity(f"positivity analysis needs a density; {d.kind} is atomic")
    x = (np.arange(grid_n) + 0.5) / grid_n
    surface = KernelSurface(d)
    h = np.asarray(marginal_density_from_tail_moment(d, x))
    p = np.asarray(d.pdf(x), dtype=float)
    base = surface.grid(x, x) + d.variance() - h[:, None] - h[None, :]
    coef = p[:, None] + p[None, :] - 1.0
    return base, coef


def nonnegativity_threshold(d: Distribution, grid_n: int = THRESHOLD_GRID,
                            tol: float = THRESHOLD_TOL) -> float:
    """Smallest c making the mixing density nonnegative, by bisection on c
    with the grid minimum of psi as the (numerical, not certified) inner
    oracle."""
    _require_unit_support(d)
    base, coef = _psi_grid_parts(d, grid_n)
    grid_min = lambda c: float(np.min(base + c * coef))
    if grid_min(0.0) >= PSI_SLACK:
        return 0.0
    hi = max(d.variance(), 1.0 / 16.0)
    while grid_min(hi) < PSI_SLACK:
        hi *= 2.0
        if hi > 1e3:
            raise RuntimeError("no finite nonnegativity threshold below c = 1e3; "
                               "the density dips where p(x) + p(y) < 1")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if grid_min(mid) >= PSI_SLACK:
            hi = mid
        else:
            lo = mid
    return hi


def sufficient_c(d: Distribution, alpha: float, probe_n: int = 1000) -> float:
    """(sigma - sigma^2) / (2 alpha - 1): an explicit c that makes the
    mixing density nonnegative whenever the source density stays >= alpha
    with alpha > 1/2."""
    if not alpha > 0.5:
        raise AlphaTooSmall(f"the sufficient-c formula needs alpha > 1/2, got {alpha}")
    _require_unit_support(d)
    if d.atoms() is not None:
        raise NoDensity(f"sufficient-c needs a density; {d.kind} is atomic")
    x = (np.arange(probe_n) + 0.5) / probe_n
    p = np.asarray(d.pdf(x), dtype=float)
    if np.min(p) < alpha - _SUPPORT_SLACK:
        i = int(np.argmin(p))
        raise DensityBelowAlpha(f"density {p[i]:.6g} at x={x[i]:.4g} is below "
                                f"the declared bound alpha={alpha:.6g}")
    sigma = float(np.sqrt(d.variance()))
    return (sigma - sigma ** 2) / (2.0 * alpha - 1.0)


# ---------- verification ----------


def verify_periodic_identity(mm: MixingMeasure, u: TestFunction, v: TestFunction) -> float:
    """|cov(u(X), v(X)) - integral of u'(x) v'(y) d lambda| for 1-periodic
    u, v; the left side comes from the direct oracle, the right side from
    component-wise integration of the structured measure."""
    _require_periodic(u)
    _require_periodic(v)
    lhs = direct_covariance(mm.source, u, v)
    rhs = mm.integrate_pair(u, v)
    return float(abs(lhs - rhs))


def fourier_residual(mm: MixingMeasure, k: int, l: int) -> float:
    """|f(k+l) - f(k) f(l) + (2 pi)^2 k l lambda-hat(k, l)| with f the
    source characteristic function read at integer frequencies 2 pi n."""
    f = lambda n: complex(np.asarray(mm.source.characteristic_function(2.0 * np.pi * n)).reshape(()))
    lam = mm.fourier_coefficient(k, l)
    return float(abs(f(k + l) - f(k) * f(l) + (2.0 * np.pi) ** 2 * k * l * lam))


# ---------- general mixing family ----------


class SignedMeasure:
    """Finite signed measure on [0,1) as a combination of atoms, scaled
    laws, Lebesgue measure, and explicit densities; supports +, - and
    scalar multiplication.  Only derivative integrals are needed here."""

    def __init__(self, terms=()):
        self.terms = tuple(terms)

    @staticmethod
    def zero() -> "SignedMeasure":
        return SignedMeasure()

    @staticmethod
    def atom(x: float, weight: float = 1.0) -> "SignedMeasure":
        if not 0.0 <= x < 1.0:
            raise UnsupportedSupport(f"atom at {x} is outside [0,1)")
        return SignedMeasure((("atom", float(x), float(weight)),))

    @staticmethod
    def of_distribution(d: Distribution, weight: float = 1.0) -> "SignedMeasure":
        _require_unit_support(d)
        return SignedMeasure((("distribution", d, float(weight)),))

    @staticmethod
    def lebesgue(weight: float = 1.0) -> "SignedMeasure":
        return SignedMeasure((("lebesgue", None, float(weight)),))

    @staticmethod
    def of_density(fn, weight: float = 1.0) -> "SignedMeasure":
        return SignedMeasure((("density", fn, float(weight)),))

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        return SignedMeasure(self.terms + other.terms)

    def __neg__(self) -> "SignedMeasure":
        return SignedMeasure(tuple((k, p, -w) for k, p, w in self.terms))

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        return self + (-other)

    def __mul__(self, scalar: float) -> "SignedMeasure":
        return SignedMeasure(tuple((k, p, w * float(scalar)) for k, p, w in self.terms))

    __rmul__ = __mul__

    def integrate_derivative(self, fn: TestFunction) -> float:
        """integral of u' against the measure, term by term."""
        total = 0.0
        for kind, payload, weight in self.terms:
            if kind == "atom":
                total += weight * float(fn.du(payload))
            elif kind == "distribution":
                total += weight * float(payload.expectation(fn.du, knots=fn.knots))
            elif kind == "lebesgue":
                rule = _lebesgue_rule(fn.knots)
                total += weight * float(np.dot(rule.weights,
                                               np.asarray(fn.du(rule.nodes), dtype=float)))
            else:  # density
                rule = _lebesgue_rule(fn.knots)
                total += weight * float(np.dot(rule.weights,
                                               np.asarray(fn.du(rule.nodes), dtype=float)
                                               * np.asarray(payload(rule.nodes), dtype=float)))
        return total


def general_mixing_invariance(d: Distribution, lambda1: SignedMeasure,
                              lambda2: SignedMeasure, u: TestFunction,
                              v: TestFunction) -> float:
    """Residual of the covariance representation for the perturbed measure
    lambda_mu + lambda1 x m + m x lambda2; the perturbation terms multiply
    integrals of periodic derivatives over a full period, so any signed
    lambda1, lambda2 leave the covariance unchanged."""
    _require_periodic(u)
    _require_periodic(v)
    _require_unit_support(d)
    lhs = direct_covariance(d, u, v)
    form = KernelSurface(d).bilinear_form(extra_knots=(0.0, 1.0, *u.knots, *v.knots))
    rule_u, rule_v = _lebesgue_rule(u.knots), _lebesgue_rule(v.knots)
    m_u = float(np.dot(rule_u.weights, np.asarray(u.du(rule_u.nodes), dtype=float)))
    m_v = float(np.dot(rule_v.weights, np.asarray(v.du(rule_v.nodes), dtype=float)))
    rhs = float(form.apply(u.du, v.du)) \
        + lambda1.integrate_derivative(u) * m_v + m_u * lambda2.integrate_derivative(v)
    return float(abs(lhs - rhs))
