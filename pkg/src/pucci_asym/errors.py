"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PucciError(Exception):
    """Base class for all package errors."""


class InputError(PucciError, ValueError):
    """Malformed input: non-finite entries, dimension mismatch, bad shapes."""


class ParameterError(InputError):
    """A model parameter lies outside its admissible range."""


class DomainError(InputError):
    """A point or argument lies outside the domain where a quantity is defined."""


class GeometryError(InputError):
    """Inconsistent geometric configuration."""


class MultiContactError(GeometryError):
    """The nearest boundary point of an interior point is not unique."""


class CurvatureConditionError(GeometryError):
    """A principal curvature at the contact point violates kappa < 1/R."""


class ConfigurationError(InputError):
    """Solver or run configuration that cannot be honoured."""


class FitError(PucciError, ValueError):
    """Not enough data to fit a rate model."""


class SolverError(PucciError, RuntimeError):
    """Nonlinear solver failed to reach its tolerance."""

    def __init__(self, message: str, report: object | None = None):
        super().__init__(message)
        self.report = report
