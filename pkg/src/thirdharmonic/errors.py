"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all package errors."""


class ShapeMismatchError(LabError):
    """Array shape or grid identity does not match what an operation expects."""


class ConfigurationError(LabError):
    """Grid, weight, or run parameters are structurally invalid."""


class UnsupportedModeError(LabError):
    """Operation is not defined for this grid mode."""


class SeedError(LabError):
    """Solver seed is zero or degenerate after normalization."""


class ConvergenceError(LabError):
    """Iteration did not reach the requested tolerance."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class TrivialSolutionError(LabError):
    """Solver collapsed to the zero pair."""


class NumericalFaultError(LabError):
    """NaN/Inf produced during a computation."""


class ValidationError(LabError):
    """User-facing configuration or input validation failure (CLI exit code 2)."""
