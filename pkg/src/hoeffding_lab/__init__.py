"""Hoeffding kernels and their verification toolkit.

The package computes, for one-dimensional laws: the Hoeffding kernel
H(x,y) = F(x ∧ y)(1 − F(x ∨ y)) and its covariance identity, the marginal
density h and Stein kernel tau = h/p, the Mercer spectrum of the kernel
operator, and periodic mixing measures on the unit square, each checked
against independent quadrature and Monte Carlo oracles.
"""

from .dist import (Beta, Distribution, Empirical, Exponential, Gaussian,
                   TwoPoint, Uniform, load_empirical, parse_distribution)
from .errors import (AlphaTooSmall, AtomicDistribution, DensityBelowAlpha,
                     DivergentMoment, EmptySample, HoeffdingLabError,
                     IndexOutOfSpectrum, IntegrabilityViolation,
                     NegativeRadicand, NoDensity, NonPeriodicFunction,
                     ParseError, UnsupportedSupport, ZeroDensity)
from .kernel import KernelSurface, kernel_eval
from .marginal import (gaussian_characterization_residual, gaussian_tv_bound,
                       marginal_density, marginal_density_from_cdf_product,
                       marginal_density_from_tail_moment,
                       stein_identity_residual, stein_kernel)
from .oracle import (TestFunction, direct_covariance, hoeffding_covariance,
                     mc_covariance, test_library, verification_rows)
from .periodic import (MixingMeasure, SignedMeasure, build_mixing,
                       distance_profile, fourier_residual,
                       general_mixing_invariance, mixing_density,
                       nonnegativity_threshold, rescale_to_T, sufficient_c,
                       uniform_mixing_density, verify_periodic_identity)
from .quadrature import QuadratureScheme
from .spectral import (SpectralDecomposition, boundary_values,
                       mercer_reconstruct, nystrom_decompose,
                       sturm_liouville_residual, trace_residual,
                       trace_summary, variance_series)

__version__ = "0.1.0"

__all__ = [
    "AlphaTooSmall", "AtomicDistribution", "Beta", "DensityBelowAlpha",
    "Distribution", "DivergentMoment", "Empirical", "EmptySample",
    "Exponential", "Gaussian", "HoeffdingLabError", "IndexOutOfSpectrum",
    "IntegrabilityViolation", "KernelSurface", "MixingMeasure",
    "NegativeRadicand", "NoDensity", "NonPeriodicFunction", "ParseError",
    "QuadratureScheme", "SignedMeasure", "SpectralDecomposition",
    "TestFunction", "TwoPoint", "Uniform", "UnsupportedSupport",
    "ZeroDensity", "boundary_values", "build_mixing", "direct_covariance",
    "distance_profile", "fourier_residual", "gaussian_characterization_residual",
    "gaussian_tv_bound", "general_mixing_invariance", "hoeffding_covariance",
    "kernel_eval", "load_empirical", "marginal_density",
    "marginal_density_from_cdf_product", "marginal_density_from_tail_moment",
    "mc_covariance", "mercer_reconstruct", "mixing_density",
    "nonnegativity_threshold", "nystrom_decompose", "parse_distribution",
    "rescale_to_T", "stein_identity_residual", "stein_kernel",
    "sufficient_c", "sturm_liouville_residual", "test_library",
    "trace_residual", "trace_summary", "uniform_mixing_density",
    "variance_series", "verification_rows", "verify_periodic_identity",
]
