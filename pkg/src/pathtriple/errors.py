"""Exception types shared across the package."""

from __future__ import annotations


class PathtripleError(Exception):
    """Base class for all package errors."""


class LengthError(PathtripleError, ValueError):
    """Not enough continued-fraction or k-sequence terms for the request."""


class ComposabilityError(PathtripleError, ValueError):
    """Source and range vertices do not match."""


class DomainError(PathtripleError, ValueError):
    """An argument lies outside the domain of the operation."""


class HorizonError(PathtripleError, ValueError):
    """A measure was requested beyond the computed horizon."""


class ConvergenceError(PathtripleError, RuntimeError):
    """An iterative computation failed to settle within its cap."""


class ConfigError(PathtripleError, ValueError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
