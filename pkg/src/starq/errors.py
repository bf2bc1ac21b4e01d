"""Exception types shared across the package."""

from __future__ import annotations


class StarqError(Exception):
    """Base class for all starq errors."""


class InvalidParameterError(StarqError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientDataError(StarqError):
    """The supplied data cannot support the requested estimate."""


class DegenerateDataError(StarqError):
    """The data is formally valid but carries no usable signal."""


class OutOfRangeError(StarqError, ValueError):
    """A value lies outside the domain an operation is defined on."""


class InfeasibleError(StarqError):
    """No point in the feasible set satisfies the constraint."""
