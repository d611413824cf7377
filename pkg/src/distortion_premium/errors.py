"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DistortionPremiumError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DistortionPremiumError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(DistortionPremiumError, ValueError):
    """Inconsistent configuration, e.g. a step count that does not divide n."""


class UnboundedPremiumError(DistortionPremiumError, ArithmeticError):
    """The premium integral diverges."""


class NoFiniteBoundError(DistortionPremiumError, ArithmeticError):
    """A continuity bound requires a norm of h that is infinite."""


class DisutilityOverflowError(DistortionPremiumError, OverflowError):
    """The disutility overflowed double precision."""


class ConvergenceError(DistortionPremiumError, RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate found so far is kept on ``best`` so callers can still
    inspect it.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class InternalError(DistortionPremiumError, RuntimeError):
    """A state that valid inputs should never produce."""
