"""Exception types shared across the package.

Every error raised on a contract violation derives from HoeffdingLabError so
callers can catch the whole family at once.  The CLI maps usage problems to
exit code 1 and tolerance breaches to exit code 2; these classes cover the
library-level failure modes in between.
"""


class HoeffdingLabError(Exception):
    """Base class for all package-specific errors."""


class ParseError(HoeffdingLabError):
    """Malformed distribution spec or non-numeric row in an input file."""


class EmptySample(HoeffdingLabError):
    """Empirical input contained no data rows."""


class DivergentMoment(HoeffdingLabError):
    """A required absolute moment failed to stabilise under truncation."""


class NegativeRadicand(HoeffdingLabError):
    """Pseudometric radicand below the floating-point tolerance floor."""


class AtomicDistribution(HoeffdingLabError):
    """Operation requires a continuous law but the source carries atoms."""


class NoDensity(HoeffdingLabError):
    """Operation requires a Lebesgue density the source does not have."""


class ZeroDensity(HoeffdingLabError):
    """Density underflow at an evaluation point (ratio would blow up)."""


class IndexOutOfSpectrum(HoeffdingLabError):
    """Requested eigenvalue index is beyond the resolved spectrum."""


class UnsupportedSupport(HoeffdingLabError):
    """Source law is not supported on the required interval."""


class AlphaTooSmall(HoeffdingLabError):
    """Density lower bound must exceed 1/2 for the sufficient-constant rule."""


class DensityBelowAlpha(HoeffdingLabError):
    """Claimed density lower bound is violated on the probe grid."""


class NonPeriodicFunction(HoeffdingLabError):
    """Test function does not match values/derivatives at the period ends."""


class IntegrabilityViolation(HoeffdingLabError):
    """Double integral of |u'||u'| against the kernel fails to stabilise."""
