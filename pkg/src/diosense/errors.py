"""Exception types raised across the package.

Invalid arguments are reported with the builtin :class:`ValueError`; the
classes below cover the failure modes specific to sparse sensing.
"""


class DiosenseError(Exception):
    """Base class for package-specific errors."""


class UnsolvableTripleError(DiosenseError, ValueError):
    """The rate differences of a sampler triple share a common factor."""


class InvalidSchemeError(DiosenseError, ValueError):
    """Coefficients do not satisfy the homogeneous/unit Diophantine system."""


class ScheduleInconsistencyError(DiosenseError):
    """A schedule entry has a coefficient whose sign breaks the slot pattern."""


class IncompleteStreamError(DiosenseError, KeyError):
    """A sample stream does not hold an index that an estimator demands."""


class DegeneracyError(DiosenseError):
    """Source frequencies make a third-order cross term non-vanishing."""


class DegenerateSpectrumError(DiosenseError):
    """The pseudospectrum has fewer local maxima than requested sources."""


class NotCoveredError(DiosenseError, ValueError):
    """A coarray lag is not realised by any sensor combination."""


class BezoutWindowError(DiosenseError, RuntimeError):
    """No Bezout pair exists inside the requested block window."""
