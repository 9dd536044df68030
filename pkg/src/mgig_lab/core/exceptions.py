#!/usr/bin/env python3
"""
Exception classes for MGIG Lab.

One hierarchy for every failure the kernels, models and CLI can report. The
base class carries an optional ``details`` mapping (offending dimension,
eigenvalue, index...) that is rendered into the message and written to the
``status`` column of result rows.
"""

from typing import Any, Dict, Optional, Type


class MgigError(Exception):
    """Base exception for all MGIG Lab errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details
        super().__init__(message)

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} - Details: {self.details}"
        return self.message


class NotSpdError(MgigError):
    """Raised when a matrix that must be positive definite is not."""

    pass


class NotSymmetricError(MgigError):
    """Raised when a matrix that must be symmetric is not."""

    pass


class NonPositiveDiagonalError(MgigError):
    """Raised when a Cholesky diagonal entry is not strictly positive."""

    pass


class DimMismatchError(MgigError):
    """Raised when array shapes disagree."""

    pass


class InvalidParamsError(MgigError):
    """Raised when distribution parameters fall outside their domain."""

    pass


class InvalidDofError(InvalidParamsError):
    """Raised when Wishart degrees of freedom do not exceed dim - 1."""

    pass


class LambdaTooSmallError(InvalidParamsError):
    """Raised when a Wishart-proposal kernel is asked to run with λ ≤ -1."""

    pass


class RankDeficientThetaError(InvalidParamsError):
    """Raised when the Matsumoto-Yor factor Θ lacks full column rank."""

    pass


class BoundaryParamsError(InvalidParamsError):
    """Raised when a closed form requires a > 0 and b > 0 but one is zero."""

    pass


class IndexOutOfRangeError(MgigError):
    """Raised when a block index is outside 1..p-1."""

    pass


class SeriesTooShortError(MgigError):
    """Raised when a series is too short for autocorrelation estimates."""

    pass


class EmptyChainError(MgigError):
    """Raised when a diagnostic receives a chain with no recorded steps."""

    pass


class ConfigError(MgigError):
    """Raised when an experiment configuration is invalid."""

    pass


# Exit codes used by the CLI; anything not listed is a runtime failure.
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_FAILURE = 3

ERROR_EXIT_CODES: Dict[Type[MgigError], int] = {
    ConfigError: EXIT_CONFIG_ERROR,
}


def get_exit_code(exc: BaseException) -> int:
    """
    Map an exception to the CLI exit code that reports it.

    Args:
        exc: The exception raised by a command

    Returns:
        The exit code for the most specific matching class
    """
    for exc_class in type(exc).__mro__:
        if exc_class in ERROR_EXIT_CODES:
            return ERROR_EXIT_CODES[exc_class]  # type: ignore[index]
    return EXIT_RUNTIME_FAILURE


def status_for(exc: BaseException) -> str:
    """Short status token written to results.csv for a failed cell."""
    return f"error:{type(exc).__name__}"
