"""Exception types shared across the package."""


class StepAllocError(Exception):
    """Base class for all package errors."""


class ConfigError(StepAllocError, ValueError):
    """Invalid profile or system configuration; message names the field."""


class SolverError(StepAllocError, RuntimeError):
    """Numerical failure inside the solver (bracketing, non-finite values)."""
