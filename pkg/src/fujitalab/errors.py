"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FujitaLabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(FujitaLabError, ValueError):
    """Invalid manifold, drift or solver configuration."""


class DomainError(FujitaLabError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(FujitaLabError, ValueError):
    """Barrier or criterion parameters violate a required constraint.

    ``constraint`` names the binding inequality so callers can report it.
    """

    def __init__(self, message: str, constraint: str | None = None, **values: float):
        super().__init__(message)
        self.constraint = constraint
        self.values = values


class NumericError(FujitaLabError, ArithmeticError):
    """Non-finite values encountered during evaluation or time stepping."""

    def __init__(self, message: str, *, radius: float | None = None, time: float | None = None):
        super().__init__(message)
        self.radius = radius
        self.time = time


class UsageError(FujitaLabError, TypeError):
    """An operation was called on an object of the wrong kind."""


class SchemaError(FujitaLabError, ValueError):
    """A scenario file does not match the documented schema."""
