"""Exception types shared across the package."""


class BergballError(Exception):
    """Base class for all package errors."""


class DomainError(BergballError, ValueError):
    """A point lies outside the open unit ball (or too close to its boundary)."""


class ParameterError(BergballError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DimensionError(BergballError, ValueError):
    """Operands have incompatible dimensions."""


class ToleranceNotMet(BergballError, RuntimeError):
    """An adaptive routine ran out of budget before reaching its tolerance.

    The best available estimate is kept in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class DegenerateDeterminant(BergballError, ValueError):
    """The Jacobian determinant vanishes where a nonzero value is required."""


class DegeneratePair(BergballError, ValueError):
    """Two points coincide where distinct points are required."""


class CriticalPoint(BergballError, ValueError):
    """The derivative is (numerically) zero where a formula divides by it."""


class RangeViolation(BergballError, ValueError):
    """An inner map of a composition sends a sample point outside the ball.

    ``witness`` holds the offending input point.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
