"""Exception hierarchy shared by all modules."""


class SNTailError(Exception):
    """Base class for every error raised by :mod:`sntail`."""


class DomainError(SNTailError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class UnsupportedShapeError(DomainError):
    """The operation has no formula for this shape (typically ``lambda == 0``)."""


class UnsupportedBranchError(DomainError):
    """The asymptotic formula requested does not cover this sign of ``theta``."""


class OutOfAsymptoticRangeError(DomainError):
    """``u`` is too large for an asymptotic formula to be evaluable."""


class BelowValidityRangeError(DomainError):
    """A bound is non-positive at this ``z`` and cannot be taken in log scale."""


class ConvergenceError(SNTailError, RuntimeError):
    """A quadrature or root-finding routine did not meet its tolerance.

    ``diagnostics`` carries whatever the failing routine knew (estimates,
    node counts, brackets) so callers can report it.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class InsufficientSamplesError(SNTailError, RuntimeError):
    """A Monte Carlo estimator saw no conditioning events."""
