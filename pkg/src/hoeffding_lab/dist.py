"""One-dimensional source laws: parametric families, empirical samples, DSL.

Each law exposes the handful of primitives the rest of the package needs
(cdf, density where it exists, quantiles, first two moments, characteristic
function, sampling against a caller-owned RNG) plus an `expectation` helper
that routes integrals through the family-appropriate quadrature: exact sums
for atomic laws, quantile-space panels when the density is unbounded at an
endpoint, plain x-space panels otherwise.  Instances are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.stats

from .errors import DivergentMoment, EmptySample, NoDensity, ParseError
from .quadrature import QuadratureScheme, integrate_tail

_STABILITY_COARSE_EPS = 1e-7
_STABILITY_TOL = 1e-4

# Window used by `expectation` when the eps-quantile span dwarfs the central
# bulk: panels cut at this level, the rational tail map carries the rest.
_HEAVY_SPAN_RATIO = 64.0
_HEAVY_WINDOW_EPS = 1.0 / 4096.0


def _match_shape(values, template):
    """Return a scalar when the input was scalar, else the array."""
    if np.isscalar(template) or getattr(template, "ndim", 1) == 0:
        out = np.asarray(values).reshape(())
        return complex(out) if np.iscomplexobj(out) else float(out)
    return np.asarray(values)


class Distribution:
    """Base law.  Subclasses fill in cdf/quantile and override what they can
    compute in closed form; everything else falls back to quadrature with a
    truncation-stability check that raises DivergentMoment when an absolute
    moment keeps growing as the truncation level tightens.
    """

    kind: str = "abstract"
    has_density: bool = False

    def __init__(self, a0: float, a1: float):
        self._a0 = float(a0)
        self._a1 = float(a1)

    # ---------- contract surface ----------

    @property
    def support(self) -> tuple[float, float]:
        """Essential support endpoints a0 = inf{F > 0}, a1 = sup{F < 1}."""
        return (self._a0, self._a1)

    @property
    def params(self) -> dict:
        return {}

    def spec(self) -> str:
        """Canonical DSL string for reports."""
        if not self.params:
            return self.kind
        body = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}:{body}"

    def cdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        raise NoDensity(f"{self.kind} law has no Lebesgue density")

    def quantile(self, u):
        raise NotImplementedError

    def atoms(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(locations, weights) for purely atomic laws, else None."""
        return None

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Inverse-CDF sampling; the caller owns the generator."""
        return np.asarray(self.quantile(rng.random(n)))

    # ---------- moments ----------

    def mean(self) -> float:
        return self.moments()[0]

    def variance(self) -> float:
        return self.moments()[1]

    def mean_abs_deviation(self) -> float:
        return self.moments()[2]

    def moments(self) -> tuple[float, float, float]:
        """(mean, variance, mean absolute deviation around the mean)."""
        self._require_stable(np.abs, "first absolute moment")
        m = self.expectation(lambda x: x)
        self._require_stable(lambda x: (x - m) ** 2, "second moment")
        var = self.expectation(lambda x: (x - m) ** 2)
        mad = self.expectation(lambda x: np.abs(x - m), knots=(m,))
        return (m, var, mad)

    def _require_stable(self, g, label: str) -> None:
        # Raw truncated integrals (no tail extension): a convergent moment
        # moves by at most the tail mass between the two levels, while e.g.
        # E|X| of an infinite-mean law keeps growing logarithmically.
        fine = self.expectation(g, tails=False)
        coarse = self.expectation(g, eps=_STABILITY_COARSE_EPS, tails=False)
        if abs(fine - coarse) > _STABILITY_TOL * (1.0 + abs(fine)):
            raise DivergentMoment(f"{label} of {self.kind} law does not stabilise under truncation "
                                  f"({coarse:.6g} vs {fine:.6g})")

    # ---------- transforms ----------

    def characteristic_function(self, t):
        """E exp(itX); quadrature fallback, closed forms in subclasses."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.array([self.expectation(lambda x, tt=tt: np.exp(1j * tt * x)) for tt in ts])
        return _match_shape(vals, t)

    # ---------- integration support ----------

    def truncated_support(self, eps: float = None) -> tuple[float, float]:
        """Finite working interval: exact endpoints when finite, quantile
        truncation otherwise."""
        eps = QuadratureScheme().truncation_eps if eps is None else eps
        lo, hi = self.support
        if not np.isfinite(lo):
            lo = float(self.quantile(eps))
        if not np.isfinite(hi):
            hi = float(self.quantile(1.0 - eps))
        return (lo, hi)

    def quantile_knots(self, n: int = 32) -> np.ndarray:
        """Interior equal-probability knots for panel grading."""
        return np.asarray(self.quantile(np.arange(1, n) / n), dtype=float)

    def heavy_tailed(self, eps: float = None) -> bool:
        """True when the eps-truncated span dwarfs the interquantile bulk, so
        equal-width panels over it cannot resolve where the mass sits."""
        if self.atoms() is not None or all(np.isfinite(self.support)):
            return False
        lo, hi = self.truncated_support(eps)
        q = np.asarray(self.quantile(np.array([1.0 / 64.0, 63.0 / 64.0])), dtype=float)
        bulk = float(q[1] - q[0])
        return bulk > 0.0 and (hi - lo) > _HEAVY_SPAN_RATIO * bulk

    def expectation(self, g, knots=(), eps: float = None, scheme: QuadratureScheme | None = None,
                    tails: bool = True):
        """E g(X) by the family-appropriate quadrature route.

        For unbounded supports the quantile-truncated panel integral is
        completed with rational-map tail integrals from the cut points, so
        polynomially growing integrands keep full accuracy.  `tails=False`
        gives the raw truncated value (used by the stability probe).

        Heavy-tailed laws cut the panel window at `_HEAVY_WINDOW_EPS` instead
        and grade it by probability: at extreme quantile cuts the equal-width
        panels all land where the density is negligible and even a bounded
        integrand comes back as zero.
        """
        at = self.atoms()
        if at is not None:
            locs, wts = at
            return np.dot(wts, g(locs))
        scheme = scheme or QuadratureScheme()
        eps = scheme.truncation_eps if eps is None else eps
        lo, hi = self.truncated_support(eps)
        if not hi > lo:
            return np.asarray(g(np.asarray([lo])))[0].item()
        extra = tuple(knots)
        if tails and self.heavy_tailed(eps):
            lo, hi = self.truncated_support(max(eps, _HEAVY_WINDOW_EPS))
            extra = extra + tuple(self.quantile_knots(64))
        rule = scheme.rule(lo, hi, extra_knots=extra)
        total = np.dot(rule.weights, np.asarray(g(rule.nodes)) * self.pdf(rule.nodes))
        if tails:
            scale = (hi - lo) / 8.0
            weighted = lambda y: np.asarray(g(y)) * self.pdf(y)
            if not np.isfinite(self.support[0]):
                total = total + integrate_tail(weighted, lo, scale=scale, side=-1)
            if not np.isfinite(self.support[1]):
                total = total + integrate_tail(weighted, hi, scale=scale, side=+1)
        return total

    def kernel_knots(self) -> tuple[float, ...]:
        """Discontinuity/grading knots for 2-D kernel quadrature."""
        at = self.atoms()
        if at is not None:
            return tuple(at[0])
        return tuple(self.quantile_knots(32))


# ---------- scipy-backed continuous families ----------


class _FrozenBacked(Distribution):
    """Continuous family delegating cdf/pdf/quantile to a frozen scipy law."""

    has_density = True

    def __init__(self, frozen, a0, a1):
        super().__init__(a0, a1)
        self._frozen = frozen

    def cdf(self, x):
        return _match_shape(self._frozen.cdf(np.asarray(x, dtype=float)), x)

    def pdf(self, x):
        return _match_shape(self._frozen.pdf(np.asarray(x, dtype=float)), x)

    def quantile(self, u):
        return _match_shape(self._frozen.ppf(np.asarray(u, dtype=float)), u)


class Uniform(_FrozenBacked):
    kind = "uniform"

    def __init__(self, a: float = 0.0, b: float = 1.0):
        if not b > a:
            raise ValueError(f"uniform needs b > a, got a={a}, b={b}")
        self.a, self.b = float(a), float(b)
        super().__init__(scipy.stats.uniform(loc=a, scale=b - a), a, b)

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    def moments(self):
        span = self.b - self.a
        return ((self.a + self.b) / 2.0, span ** 2 / 12.0, span / 4.0)

    def characteristic_function(self, t):
        ts = np.asarray(t, dtype=float)
        out = np.ones(np.shape(ts), dtype=complex)
        nz = ts != 0
        tn = np.atleast_1d(ts)[np.atleast_1d(nz)]
        vals = (np.exp(1j * tn * self.b) - np.exp(1j * tn * self.a)) / (1j * tn * (self.b - self.a))
        if out.ndim == 0:
            return vals[0] if nz else complex(out)
        out[nz] = vals
        return out


class Gaussian(_FrozenBacked):
    kind = "gaussian"

    def __init__(self, mu: float = 0.0, sigma: float = 1.0):
        if not sigma > 0:
            raise ValueError(f"gaussian needs sigma > 0, got {sigma}")
        self.mu, self.sigma = float(mu), float(sigma)
        super().__init__(scipy.stats.norm(loc=mu, scale=sigma), -np.inf, np.inf)

    @property
    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    def moments(self):
        return (self.mu, self.sigma ** 2, self.sigma * np.sqrt(2.0 / np.pi))

    def characteristic_function(self, t):
        ts = np.asarray(t, dtype=float)
        return _match_shape(np.exp(1j * self.mu * ts - 0.5 * (self.sigma * ts) ** 2), t)


class Exponential(_FrozenBacked):
    kind = "exponential"

    def __init__(self, rate: float = 1.0):
        if not rate > 0:
            raise ValueError(f"exponential needs rate > 0, got {rate}")
        self.rate = float(rate)
        super().__init__(scipy.stats.expon(scale=1.0 / rate), 0.0, np.inf)

    @property
    def params(self):
        return {"rate": self.rate}

    def moments(self):
        # E|X - 1/rate| = 2/(e*rate)
        return (1.0 / self.rate, 1.0 / self.rate ** 2, 2.0 / (np.e * self.rate))

    def characteristic_function(self, t):
        ts = np.asarray(t, dtype=float)
        return _match_shape(self.rate / (self.rate - 1j * ts), t)


class Beta(_FrozenBacked):
    kind = "beta"

    def __init__(self, alpha: float = 1.0, beta: float = 1.0):
        if not (alpha > 0 and beta > 0):
            raise ValueError(f"beta needs positive shapes, got alpha={alpha}, beta={beta}")
        self.alpha, self.beta = float(alpha), float(beta)
        super().__init__(scipy.stats.beta(alpha, beta), 0.0, 1.0)

    @property
    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}

    def moments(self):
        a, b = self.alpha, self.beta
        mean = a / (a + b)
        var = a * b / ((a + b) ** 2 * (a + b + 1.0))
        mad = self.expectation(lambda x: np.abs(x - mean), knots=(mean,))
        return (mean, var, mad)

    def characteristic_function(self, t):
        # Kummer's function 1F1(alpha; alpha+beta; it); mpmath handles the
        # complex argument exactly where scipy's hyp1f1 is real-only.
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.array([complex(mpmath.hyp1f1(self.alpha, self.alpha + self.beta, 1j * tt)) for tt in ts])
        return _match_shape(vals, t)

    def expectation(self, g, knots=(), eps: float = None, scheme: QuadratureScheme | None = None,
                    tails: bool = True):
        # Quantile-space integral: the map u -> Q(u) absorbs the endpoint
        # density singularities that defeat x-space panels when alpha or
        # beta < 1.  Support is compact, so `tails` has nothing to add.
        scheme = scheme or QuadratureScheme()
        eps = scheme.truncation_eps if eps is None else eps
        u_knots = [float(self.cdf(k)) for k in knots if 0.0 < self.cdf(k) < 1.0]
        rule = scheme.rule(eps, 1.0 - eps, extra_knots=u_knots)
        return np.dot(rule.weights, np.asarray(g(np.asarray(self.quantile(rule.nodes)))))


# ---------- atomic families ----------


class TwoPoint(Distribution):
    """Bernoulli-type law p*delta_a + (1-p)*delta_b with a < b."""

    kind = "bernoulli"

    def __init__(self, p: float = 0.5, a: float = 0.0, b: float = 1.0):
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"bernoulli needs p in [0,1], got {p}")
        if not b > a:
            raise ValueError(f"bernoulli needs b > a, got a={a}, b={b}")
        self.p, self.a, self.b = float(p), float(a), float(b)
        if p == 1.0:
            super().__init__(a, a)
        elif p == 0.0:
            super().__init__(b, b)
        else:
            super().__init__(a, b)

    @property
    def params(self):
        return {"p": self.p, "a": self.a, "b": self.b}

    def atoms(self):
        return (np.array([self.a, self.b]), np.array([self.p, 1.0 - self.p]))

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        return _match_shape(np.where(xs < self.a, 0.0, np.where(xs < self.b, self.p, 1.0)), x)

    def quantile(self, u):
        us = np.asarray(u, dtype=float)
        return _match_shape(np.where(us <= self.p, self.a, self.b), u)

    def moments(self):
        q = 1.0 - self.p
        mean = self.p * self.a + q * self.b
        span = self.b - self.a
        return (mean, self.p * q * span ** 2, 2.0 * self.p * q * span)

    def characteristic_function(self, t):
        ts = np.asarray(t, dtype=float)
        vals = self.p * np.exp(1j * ts * self.a) + (1.0 - self.p) * np.exp(1j * ts * self.b)
        return _match_shape(vals, t)


@dataclass(frozen=True)
class EmpiricalSample:
    """Sorted sample with tied values merged into weighted atoms."""

    values: np.ndarray
    count: int
    locations: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_values(cls, values) -> "EmpiricalSample":
        arr = np.sort(np.asarray(values, dtype=float))
        if arr.size == 0:
            raise EmptySample("empirical sample has no rows")
        locs, counts = np.unique(arr, return_counts=True)
        return cls(values=arr, count=arr.size, locations=locs, weights=counts / arr.size)


class Empirical(Distribution):
    kind = "empirical"

    def __init__(self, sample: EmpiricalSample):
        self.sample = sample
        super().__init__(sample.locations[0], sample.locations[-1])

    @property
    def params(self):
        return {"n": self.sample.count}

    def atoms(self):
        return (self.sample.locations, self.sample.weights)

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.sample.values, xs, side="right")
        return _match_shape(idx / self.sample.count, x)

    def quantile(self, u):
        us = np.asarray(u, dtype=float)
        cum = np.cumsum(self.sample.weights)
        idx = np.clip(np.searchsorted(cum, us, side="left"), 0, len(cum) - 1)
        return _match_shape(self.sample.locations[idx], u)

    def moments(self):
        locs, wts = self.sample.locations, self.sample.weights
        mean = float(np.dot(wts, locs))
        var = float(np.dot(wts, (locs - mean) ** 2))
        mad = float(np.dot(wts, np.abs(locs - mean)))
        return (mean, var, mad)


# ---------- ingestion and the distribution-spec DSL ----------


def load_empirical(path: str) -> Empirical:
    """Read a one-column numeric CSV (optional single header row)."""
    rows: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",") if f.strip() != ""]
            if len(fields) != 1:
                raise ParseError(f"{path}:{lineno}: expected one column, got {len(fields)}")
            try:
                rows.append(float(fields[0]))
            except ValueError:
                if lineno == 1 and not rows:
                    continue  # optional header
                raise ParseError(f"{path}:{lineno}: non-numeric value {fields[0]!r}") from None
    if not rows:
        raise EmptySample(f"{path}: no numeric rows")
    return Empirical(EmpiricalSample.from_values(rows))


_FAMILIES = {
    "uniform": (Uniform, {"a": 0.0, "b": 1.0}),
    "gaussian": (Gaussian, {"mu": 0.0, "sigma": 1.0}),
    "exponential": (Exponential, {"rate": 1.0}),
    "beta": (Beta, {"alpha": 1.0, "beta": 1.0}),
    "bernoulli": (TwoPoint, {"p": 0.5, "a": 0.0, "b": 1.0}),
}


def parse_distribution(spec: str) -> Distribution:
    """Parse a spec like ``gaussian:mu=0,sigma=1`` or ``empirical:path=f.csv``.

    Unknown families and unknown keys are errors; missing keys take the
    family defaults.
    """
    spec = spec.strip()
    if not spec:
        raise ParseError("empty distribution spec")
    family, _, body = spec.partition(":")
    family = family.strip().lower()
    pairs: dict[str, str] = {}
    if body.strip():
        for chunk in body.split(","):
            key, sep, val = chunk.partition("=")
            if not sep or not key.strip():
                raise ParseError(f"malformed parameter {chunk!r} in {spec!r}")
            if key.strip() in pairs:
                raise ParseError(f"duplicate key {key.strip()!r} in {spec!r}")
            pairs[key.strip()] = val.strip()

    if family == "empirical":
        unknown = set(pairs) - {"path"}
        if unknown:
            raise ParseError(f"unknown keys {sorted(unknown)} for empirical")
        if "path" not in pairs:
            raise ParseError("empirical spec needs path=<file.csv>")
        return load_empirical(pairs["path"])

    if family not in _FAMILIES:
        raise ParseError(f"unknown distribution family {family!r}")
    cls, defaults = _FAMILIES[family]
    unknown = set(pairs) - set(defaults)
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)} for {family}")
    kwargs = dict(defaults)
    for key, val in pairs.items():
        try:
            kwargs[key] = float(val)
        except ValueError:
            raise ParseError(f"non-numeric value {val!r} for key {key!r}") from None
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
