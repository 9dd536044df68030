"""
Core numerical layer for MGIG Lab.

Only the exception hierarchy is re-exported here; import
:mod:`mgig_lab.core.matrix_core` and :mod:`mgig_lab.core.random_core`
directly. Keeping this package light lets the value types depend on the
exceptions without pulling in the linear-algebra kernels.
"""

from typing import List

from mgig_lab.core.exceptions import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_RUNTIME_FAILURE,
    BoundaryParamsError,
    ConfigError,
    DimMismatchError,
    EmptyChainError,
    IndexOutOfRangeError,
    InvalidDofError,
    InvalidParamsError,
    LambdaTooSmallError,
    MgigError,
    NonPositiveDiagonalError,
    NotSpdError,
    NotSymmetricError,
    RankDeficientThetaError,
    SeriesTooShortError,
    get_exit_code,
    status_for,
)

__all__: List[str] = [
    "MgigError",
    "NotSpdError",
    "NotSymmetricError",
    "NonPositiveDiagonalError",
    "DimMismatchError",
    "InvalidParamsError",
    "InvalidDofError",
    "LambdaTooSmallError",
    "RankDeficientThetaError",
    "BoundaryParamsError",
    "IndexOutOfRangeError",
    "SeriesTooShortError",
    "EmptyChainError",
    "ConfigError",
    "EXIT_OK",
    "EXIT_CONFIG_ERROR",
    "EXIT_RUNTIME_FAILURE",
    "get_exit_code",
    "status_for",
]
