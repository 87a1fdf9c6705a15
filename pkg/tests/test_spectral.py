import numpy as np
import pytest

from hoeffding_lab.dist import parse_distribution
from hoeffding_lab.errors import AtomicDistribution, IndexOutOfSpectrum
from hoeffding_lab.kernel import KernelSurface
from hoeffding_lab.oracle import TestFunction, test_library
from hoeffding_lab.spectral import (boundary_values, half_mean_abs_difference,
                                    mercer_reconstruct, nystrom_decompose,
                                    sturm_liouville_residual, trace_residual,
                                    trace_summary, variance_series)


@pytest.fixture(scope="module")
def uspec():
    return nystrom_decompose(parse_distribution("uniform:a=0,b=1"), 2000)


@pytest.fixture(scope="module")
def gspec():
    return nystrom_decompose(parse_distribution("gaussian:mu=0,sigma=1"), 1500)


def _identity():
    return next(f for f in test_library() if f.name == "x")


# ---------- uniform law, everything known in closed form ----------


def test_uniform_eigenvalues_match_closed_form(uspec):
    n = np.arange(1, 11)
    expect = 1.0 / (n * np.pi) ** 2
    got = uspec.eigenvalues[:10]
    assert np.max(np.abs(got - expect) / expect) < 1e-3
    assert abs(uspec.eigenvalue(1) - 1 / np.pi ** 2) < 1e-3 / np.pi ** 2
    assert abs(uspec.eigenvalue(5) - 1 / (25 * np.pi ** 2)) < 1e-3


def test_uniform_eigenfunctions_match_sine_modes(uspec):
    for n in range(1, 11):
        expect = np.sqrt(2.0) * np.sin(n * np.pi * uspec.nodes)
        assert np.max(np.abs(uspec.functions[:, n - 1] - expect)) < 1e-2, n


def test_uniform_trace_identity(uspec):
    assert abs(np.sum(uspec.eigenvalues) - 1 / 6) < 1e-6
    assert trace_residual(uspec) < 1e-9


def test_eigenvalues_sorted_and_nonnegative(uspec, gspec):
    for s in (uspec, gspec):
        assert np.min(np.diff(s.eigenvalues)) <= 0.0 or len(s.eigenvalues) == 1
        assert np.all(np.diff(s.eigenvalues) <= 1e-15)
        assert np.all(s.eigenvalues >= 0.0)


def test_orthonormality(uspec, gspec):
    for s in (uspec, gspec):
        V = s.functions[:, :40]
        G = V.T @ (s.weights[:, None] * V)
        assert np.max(np.abs(G - np.eye(40))) < 1e-8


def test_grid_doubling_stability():
    d = parse_distribution("uniform:a=0,b=1")
    a = nystrom_decompose(d, 1000).eigenvalues[:10]
    b = nystrom_decompose(d, 2000).eigenvalues[:10]
    assert np.max(np.abs(a - b) / b) < 1e-4


# ---------- Mercer reconstruction ----------


def test_mercer_point_values(uspec):
    assert abs(mercer_reconstruct(uspec, 200, 0.3, 0.6) - 0.12) < 1e-3
    assert abs(mercer_reconstruct(uspec, 200, 0.5, 0.5) - 0.25) < 1e-3
    assert mercer_reconstruct(uspec, 0, 0.3, 0.6) == 0.0


def test_mercer_inset_sup_error(uspec):
    xs = np.linspace(0.05, 0.95, 40)
    rec = mercer_reconstruct(uspec, 200, xs, xs)
    exact = KernelSurface(uspec.source).grid(xs, xs)
    assert np.max(np.abs(rec - exact)) < 1e-3


def test_mercer_monotone_in_terms(uspec):
    # on the diagonal every term is a non-negative increment
    errs = [abs(mercer_reconstruct(uspec, m, 0.5, 0.5) - 0.25) for m in (10, 50, 200)]
    assert errs[0] > errs[1] > errs[2]


def test_extension_reproduces_grid_samples(uspec):
    ext = uspec.extension_matrix(uspec.nodes[100:110], 3)
    assert np.max(np.abs(ext - uspec.functions[100:110, :3])) < 1e-5
    f1 = uspec.eigenfunction(1)
    val = f1(0.5)
    assert isinstance(val, float)
    assert abs(val - np.sqrt(2.0)) < 1e-3


# ---------- Sturm-Liouville structure ----------


def test_sturm_liouville_residual_uniform(uspec):
    for n in (1, 2, 3):
        res = sturm_liouville_residual(uspec, n)
        assert res <= 0.05 * np.max(np.abs(uspec.functions[:, n - 1])), n


def test_boundary_values_vanish(uspec):
    for n in (1, 3, 5):
        left, right = boundary_values(uspec, n)
        assert left <= 0.01 and right <= 0.01


def test_index_out_of_spectrum(uspec):
    with pytest.raises(IndexOutOfSpectrum):
        uspec.eigenvalue(len(uspec.eigenvalues) + 1)
    with pytest.raises(IndexOutOfSpectrum):
        uspec.eigenvalue(0)
    with pytest.raises(IndexOutOfSpectrum):
        sturm_liouville_residual(uspec, 10 ** 6)


# ---------- variance series ----------


def test_variance_series_uniform_identity(uspec):
    u = _identity()
    assert abs(variance_series(uspec, u, 500) - 1 / 12) < 1e-4
    v10 = variance_series(uspec, u, 10)
    v100 = variance_series(uspec, u, 100)
    v500 = variance_series(uspec, u, 500)
    assert v10 <= v100 + 1e-15 and v100 <= v500 + 1e-15


def test_variance_series_constant_is_zero(uspec):
    one = TestFunction("one", u=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       du=lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    assert variance_series(uspec, one, 100) == 0.0
    assert variance_series(uspec, _identity(), 0) == 0.0


# ---------- other laws ----------


def test_gaussian_trace_against_closed_form_and_mc(gspec):
    assert abs(np.sum(gspec.eigenvalues) - 1 / np.sqrt(np.pi)) < 1e-6
    est, stderr = half_mean_abs_difference(gspec.source, n_samples=200_000, seed=3)
    assert abs(est - 1 / np.sqrt(np.pi)) < 4.0 * stderr
    summary = trace_summary(gspec, n_samples=50_000, seed=3)
    assert summary["residual"] < 1e-9
    assert summary["seed"] == 3
    assert summary["mc_stderr"] > 0.0


def test_arcsine_spectrum_is_psd_with_consistent_trace():
    s = nystrom_decompose(parse_distribution("beta:alpha=0.5,beta=0.5"), 1000)
    assert np.all(s.eigenvalues >= 0.0)
    assert trace_residual(s) < 1e-9
    lo, hi = s.domain
    delta = 0.05 * (hi - lo)
    xs = np.linspace(lo + delta, hi - delta, 30)
    rec = mercer_reconstruct(s, 200, xs, xs)
    exact = KernelSurface(s.source).grid(xs, xs)
    assert np.max(np.abs(rec - exact)) < 1e-3


def test_atomic_laws_rejected(bernoulli03):
    with pytest.raises(AtomicDistribution):
        nystrom_decompose(bernoulli03, 200)
