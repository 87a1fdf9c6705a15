import numpy as np
import pytest

from hoeffding_lab.dist import Distribution, parse_distribution


class Cauchy(Distribution):
    """Infinite-mean law used to exercise the divergence guards."""

    kind = "cauchy"
    has_density = True

    def __init__(self):
        super().__init__(-np.inf, np.inf)

    def cdf(self, x):
        return 0.5 + np.arctan(np.asarray(x, dtype=float)) / np.pi

    def pdf(self, x):
        xs = np.asarray(x, dtype=float)
        return 1.0 / (np.pi * (1.0 + xs * xs))

    def quantile(self, u):
        us = np.asarray(u, dtype=float)
        return np.tan(np.pi * (us - 0.5))

    def characteristic_function(self, t):
        ts = np.asarray(t, dtype=float)
        out = np.exp(-np.abs(ts))
        return float(out) if out.ndim == 0 else out


@pytest.fixture(scope="session")
def uniform01():
    return parse_distribution("uniform:a=0,b=1")


@pytest.fixture(scope="session")
def gaussian():
    return parse_distribution("gaussian:mu=0,sigma=1")


@pytest.fixture(scope="session")
def exponential():
    return parse_distribution("exponential:rate=1")


@pytest.fixture(scope="session")
def arcsine():
    return parse_distribution("beta:alpha=0.5,beta=0.5")


@pytest.fixture(scope="session")
def bernoulli03():
    return parse_distribution("bernoulli:p=0.3,a=0,b=1")


@pytest.fixture(scope="session")
def cauchy():
    return Cauchy()
