import numpy as np
import pytest

from hoeffding_lab.dist import parse_distribution
from hoeffding_lab.errors import (AlphaTooSmall, DensityBelowAlpha, NoDensity,
                                  NonPeriodicFunction, UnsupportedSupport)
from hoeffding_lab.oracle import TestFunction, test_library
from hoeffding_lab.periodic import (MixingMeasure, SignedMeasure, build_mixing,
                                    distance_profile, fourier_residual,
                                    general_mixing_invariance, mixing_density,
                                    nonnegativity_threshold, rescale_to_T,
                                    sufficient_c, uniform_mixing_density,
                                    verify_periodic_identity, _psi_grid_parts)
from hoeffding_lab.quadrature import (QuadratureScheme, double_integral,
                                      double_integral_rect)


@pytest.fixture(scope="module")
def plib():
    return test_library(periodic_only=True, max_frequency=5)


@pytest.fixture(scope="module")
def mix_uniform(uniform01):
    return build_mixing(uniform01, 1.0 / 24.0)


# ---------- the distance profile and the uniform closed form ----------


def test_distance_profile_values():
    assert distance_profile(0.0) == 0.125
    assert distance_profile(0.5) == 0.0
    assert abs(distance_profile(0.25) - 0.03125) < 1e-15
    hs = np.linspace(0.0, 1.0, 201)
    vals = distance_profile(hs)
    assert np.min(vals) >= 0.0
    assert np.count_nonzero(vals < 1e-12) == 1   # unique zero at h = 1/2


def test_distance_profile_integrates_to_constant():
    # int_0^1 D(|s-t|) dt = 1/24 for every s, the fact behind threshold 1/24
    for s in (0.0, 0.3, 0.77):
        rule = QuadratureScheme().rule(0.0, 1.0, extra_knots=(s,))
        v = float(np.dot(rule.weights, distance_profile(np.abs(s - rule.nodes))))
        assert abs(v - 1 / 24) < 1e-14, s


def test_uniform_closed_form_matches_component_density(mix_uniform):
    xs = np.linspace(0.005, 0.995, 100)
    direct = mix_uniform.density_grid(xs, xs)
    closed = uniform_mixing_density(1 / 24, xs[:, None], xs[None, :])
    assert np.max(np.abs(direct - closed)) < 1e-10


def test_uniform_density_point_examples(uniform01):
    assert abs(uniform_mixing_density(1 / 24, 0.25, 0.5) - 0.03125) < 1e-15
    assert abs(uniform_mixing_density(1 / 12, 0.4, 0.4) - 1 / 6) < 1e-15
    assert abs(uniform_mixing_density(0.0, 0.25, 0.75) + 1 / 24) < 1e-15
    mm = build_mixing(uniform01, 1 / 24)
    assert abs(mixing_density(mm, 0.2, 0.9) - distance_profile(0.7)) < 1e-12
    assert abs(mm.density(0.5, 0.5) - 0.125) < 1e-12
    assert mm.density(0.25, 0.75) == mm.density(0.75, 0.25)


def test_mass_of_psi_by_double_quadrature(uniform01):
    mm = build_mixing(uniform01, 1 / 24)
    mass = double_integral(lambda x, y: mm.density(x, y),
                           np.linspace(0.0, 1.0, 4), points_per_panel=10)
    assert abs(mass - 1 / 24) < 1e-12
    dmass = double_integral(lambda x, y: distance_profile(np.abs(x - y)),
                            np.linspace(0.0, 1.0, 3), points_per_panel=8)
    assert abs(dmass - 1 / 24) < 1e-13


# ---------- measure structure ----------


def test_total_mass_equals_c(uniform01, arcsine):
    assert abs(build_mixing(uniform01, 1 / 24).total_mass() - 1 / 24) < 1e-10
    assert abs(build_mixing(arcsine, 0.125).total_mass() - 0.125) < 1e-8
    assert abs(build_mixing(uniform01, -0.3).total_mass() + 0.3) < 1e-10


def test_marginal_is_c_times_mu(uniform01, arcsine):
    rng = np.random.default_rng(7)
    worst = 0.0
    for d in (uniform01, arcsine):
        for c in (1 / 24, 1.0):
            mm = build_mixing(d, c)
            for _ in range(13):
                a, b = np.sort(rng.uniform(0, 1, size=2))
                got = mm.marginal_mass((a, b))
                want = c * (float(d.cdf(b)) - float(d.cdf(a)))
                worst = max(worst, abs(got - want))
    assert worst < 1e-8


def test_interval_mass_against_rect_quadrature(uniform01):
    mm = build_mixing(uniform01, 1 / 12)
    cuts = np.linspace(0.0, 1.0, 5)
    for ax, bx in (((0.1, 0.4), (0.2, 0.9)), ((0.0, 1.0), (0.3, 0.35)),
                   ((0.25, 0.75), (0.25, 0.75))):
        got = mm.interval_mass(ax, bx)
        want = double_integral_rect(lambda x, y: uniform_mixing_density(1 / 12, x, y),
                                    cuts, ax, bx, points_per_panel=12)
        assert abs(got - want) < 1e-12, (ax, bx)


def test_two_point_source_interval_masses():
    d = parse_distribution("bernoulli:p=0.3,b=0.5")
    mm = build_mixing(d, 0.1)
    assert abs(mm.marginal_mass((0.0, 0.25)) - 0.1 * 0.3) < 1e-12
    assert abs(mm.marginal_mass((0.25, 1.0)) - 0.1 * 0.7) < 1e-12
    assert abs(mm.total_mass() - 0.1) < 1e-12
    with pytest.raises(NoDensity):
        mm.density(0.2, 0.3)


def test_support_guards():
    with pytest.raises(UnsupportedSupport):
        build_mixing(parse_distribution("gaussian:mu=0.5,sigma=0.1"), 0.1)
    with pytest.raises(UnsupportedSupport):
        # default two-point law has an atom at 1, outside [0,1)
        build_mixing(parse_distribution("bernoulli:p=0.3"), 0.1)


# ---------- the covariance identity ----------


def test_periodic_identity_uniform_all_pairs(mix_uniform, plib):
    worst = 0.0
    for i, u in enumerate(plib):
        for v in plib[i:]:
            worst = max(worst, verify_periodic_identity(mix_uniform, u, v))
    assert worst < 1e-7


def test_periodic_identity_arcsine_subset(arcsine, plib):
    mm = build_mixing(arcsine, 0.125)
    by = {f.name: f for f in plib}
    pairs = [("sin1", "sin1"), ("sin1", "cos1"), ("cos2", "sin3"), ("cos5", "cos5")]
    for a, b in pairs:
        assert verify_periodic_identity(mm, by[a], by[b]) < 1e-7, (a, b)


def test_identity_constant_function_is_exact(mix_uniform, plib):
    one = TestFunction("one", u=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       du=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                       periodic=True)
    assert verify_periodic_identity(mix_uniform, one, plib[0]) < 1e-15


def test_identity_rejects_non_periodic(mix_uniform, plib):
    ident = test_library()[0]
    with pytest.raises(NonPeriodicFunction):
        verify_periodic_identity(mix_uniform, ident, plib[0])


def test_identity_holds_for_any_c(uniform01, plib):
    # the covariance identity cannot depend on c: the c-terms cancel against
    # the Lebesgue tensor parts for periodic test functions
    by = {f.name: f for f in plib}
    for c in (-1.0, 0.0, 2.5):
        mm = build_mixing(uniform01, c)
        assert verify_periodic_identity(mm, by["sin2"], by["cos3"]) < 1e-7, c


# ---------- Fourier verification ----------


def test_integer_fourier_coefficients(mix_uniform):
    lam = mix_uniform.fourier_coefficient(1, -1)
    assert abs(lam - 1 / (4 * np.pi ** 2)) < 1e-8
    assert abs(mix_uniform.fourier_coefficient(1, 2)) < 1e-8
    assert abs(mix_uniform.fourier_coefficient(0, 0) - mix_uniform.c) < 1e-10
    assert abs(mix_uniform.fourier_coefficient(0, 3)) < 1e-8
    conj_pair = np.conj(mix_uniform.fourier_coefficient(-2, 1))
    assert abs(mix_uniform.fourier_coefficient(2, -1) - conj_pair) < 1e-10


def test_fourier_residual_subset(uniform01, arcsine):
    for d in (uniform01, arcsine):
        mm = build_mixing(d, 1 / 24)
        for k, l in ((0, 0), (0, 4), (1, -1), (1, 2), (3, -3), (5, 5), (-2, -4)):
            assert fourier_residual(mm, k, l) < 1e-6, (d.kind, k, l)


# ---------- positivity analysis ----------


def test_threshold_uniform_is_one_twentyfourth(uniform01):
    c = nonnegativity_threshold(uniform01)
    assert abs(c - 1 / 24) < 1e-6


def test_threshold_arcsine_measured_value(arcsine):
    # the numerical threshold sits well below the sufficient value 1/8 =
    # sigma^2; the binding points are on the anti-diagonal near (0.26, 0.74)
    c = nonnegativity_threshold(arcsine)
    assert c <= 0.125 + 1e-6
    assert abs(c - 0.084668) < 5e-5
    base, coef = _psi_grid_parts(arcsine, 400)
    gmin = float(np.min(base + c * coef))
    assert -1e-9 <= gmin <= 1e-3


def test_threshold_postcondition_grid_min(uniform01):
    c = nonnegativity_threshold(uniform01)
    base, coef = _psi_grid_parts(uniform01, 400)
    gmin = float(np.min(base + c * coef))
    assert -1e-9 <= gmin <= 1e-3
    # strictly below the threshold the density dips negative
    assert float(np.min(base + (c - 1e-3) * coef)) < -1e-9


def test_threshold_rejects_atomic():
    with pytest.raises(NoDensity):
        nonnegativity_threshold(parse_distribution("bernoulli:p=0.3,b=0.5"))


def test_sufficient_c_values(uniform01, arcsine):
    got = sufficient_c(arcsine, 2 / np.pi)
    assert abs(got - 0.8364) < 5e-4
    assert abs(got - np.pi * (np.sqrt(8) - 1) / (8 * (4 - np.pi))) < 1e-12
    sigma = np.sqrt(1 / 12)
    assert abs(sufficient_c(uniform01, 1.0) - (sigma - sigma ** 2)) < 1e-12


def test_sufficient_c_is_at_least_threshold(uniform01, arcsine):
    assert sufficient_c(uniform01, 1.0) >= nonnegativity_threshold(uniform01) - 1e-6
    assert sufficient_c(arcsine, 2 / np.pi) >= nonnegativity_threshold(arcsine) - 1e-6


def test_sufficient_c_guards(uniform01, arcsine):
    with pytest.raises(AlphaTooSmall):
        sufficient_c(uniform01, 0.5)
    with pytest.raises(DensityBelowAlpha):
        sufficient_c(arcsine, 1.2)
    with pytest.raises(DensityBelowAlpha):
        sufficient_c(parse_distribution("beta:alpha=2,beta=2"), 0.75)


# ---------- general mixing family ----------


def test_general_mixing_spec_example(uniform01, arcsine, plib):
    l1 = (SignedMeasure.atom(0.3) + 2.0 * SignedMeasure.lebesgue()
          - 5.0 * SignedMeasure.of_distribution(arcsine))
    l2 = SignedMeasure.atom(0.9)
    assert general_mixing_invariance(uniform01, l1, l2, plib[0], plib[4]) < 1e-7


def test_general_mixing_random_measures(uniform01, arcsine, plib):
    rng = np.random.default_rng(11)

    def random_measure():
        out = SignedMeasure.zero()
        for _ in range(int(rng.integers(1, 4))):
            kind = int(rng.integers(0, 3))
            w = float(rng.uniform(-5, 5))
            if kind == 0:
                out = out + SignedMeasure.atom(float(rng.uniform(0, 1)), w)
            elif kind == 1:
                out = out + w * SignedMeasure.lebesgue()
            else:
                out = out + w * SignedMeasure.of_distribution(arcsine)
        return out

    pairs = [(plib[0], plib[1]), (plib[2], plib[5]), (plib[9], plib[8])]
    for _ in range(3):
        l1, l2 = random_measure(), random_measure()
        for u, v in pairs:
            assert general_mixing_invariance(uniform01, l1, l2, u, v) < 1e-7


def test_zero_perturbation_reduces_to_hoeffding(uniform01, plib):
    z = SignedMeasure.zero()
    assert general_mixing_invariance(uniform01, z, z, plib[0], plib[0]) < 1e-7


def test_signed_measure_algebra(arcsine, plib):
    u = plib[3]
    m = (2.0 * SignedMeasure.atom(0.3) - SignedMeasure.lebesgue()
         + SignedMeasure.of_distribution(arcsine) * 3.0)
    rule = QuadratureScheme().rule(0.0, 1.0, extra_knots=u.knots)
    manual = (2.0 * float(u.du(0.3))
              - float(np.dot(rule.weights, np.asarray(u.du(rule.nodes), dtype=float)))
              + 3.0 * float(arcsine.expectation(u.du, knots=u.knots)))
    assert abs(m.integrate_derivative(u) - manual) < 1e-12
    assert (-m).integrate_derivative(u) == -m.integrate_derivative(u)


def test_signed_measure_guards(gaussian):
    with pytest.raises(UnsupportedSupport):
        SignedMeasure.atom(1.2)
    with pytest.raises(UnsupportedSupport):
        SignedMeasure.of_distribution(gaussian)


def test_signed_measure_density_term(uniform01, plib):
    # a density term integrating like 4x dx on [0,1)
    m = SignedMeasure.of_density(lambda x: 4.0 * np.asarray(x, dtype=float))
    u = plib[1]
    rule = QuadratureScheme().rule(0.0, 1.0, extra_knots=u.knots)
    manual = float(np.dot(rule.weights,
                          4.0 * rule.nodes * np.asarray(u.du(rule.nodes), dtype=float)))
    assert abs(m.integrate_derivative(u) - manual) < 1e-13
    assert general_mixing_invariance(uniform01, m, m, plib[0], plib[2]) < 1e-7


# ---------- rescaling ----------


def test_rescale_identity_and_examples(mix_uniform):
    assert rescale_to_T(mix_uniform, 1.0, 0.2, 0.7) == uniform_mixing_density(
        mix_uniform.c, 0.2, 0.7)
    assert abs(rescale_to_T(mix_uniform, 1.0, 0.2, 0.7)
               - mix_uniform.density(0.2, 0.7)) < 1e-12
    assert abs(rescale_to_T(mix_uniform, 2.0, 0.5, 1.5)) < 1e-15
    assert abs(rescale_to_T(mix_uniform, 2.0, 0.3, 0.3) - 0.125) < 1e-15


def test_rescaled_marginal_density(mix_uniform):
    T = 2.0
    for x in (0.3, 1.1, 1.9):
        rule = QuadratureScheme().rule(0.0, T, extra_knots=(x,))
        v = float(np.dot(rule.weights, rescale_to_T(mix_uniform, T, x, rule.nodes)))
        assert abs(v - mix_uniform.c * T) < 1e-12, x


def test_rescale_guards(mix_uniform, arcsine):
    with pytest.raises(UnsupportedSupport):
        rescale_to_T(build_mixing(arcsine, 0.125), 2.0, 0.1, 0.2)
    with pytest.raises(ValueError):
        rescale_to_T(mix_uniform, 0.0, 0.1, 0.2)
