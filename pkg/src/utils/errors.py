# src/utils/errors.py
"""Exception types raised across the package. The CLI maps all of them to exit status 1."""

from typing import Optional


class HotspotsError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(HotspotsError, ValueError):
    pass


class InvalidGeometryError(HotspotsError, ValueError):
    pass


class PreconditionError(HotspotsError):
    pass


class UnsupportedDomainError(HotspotsError):
    pass


class ConfigError(HotspotsError, ValueError):
    pass


class MeshValidationError(HotspotsError, ValueError):
    pass


class _LineError(HotspotsError, ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class MeshParseError(_LineError):
    pass


class DomainParseError(_LineError):
    pass


class FactorizationError(HotspotsError, RuntimeError):
    pass


class NonConvergenceError(HotspotsError, RuntimeError):
    def __init__(self, message: str, iterations: int = 0, best_residual: float = float("nan")):
        self.iterations = iterations
        self.best_residual = best_residual
        super().__init__(f"{message} (iterations={iterations}, best_residual={best_residual:.3e})")
