#!/usr/bin/env python3
"""
Dense symmetric / SPD kernels used by every sampler.

Unit-diagonal Cholesky (Σ = B A Bᵀ) and its packed off-diagonal layout,
eigen-based matrix exp/log/sqrt, and the closed-form solution of the
symmetric Riccati equation 2λΣ - ΣΨΣ + Γ = 0 that gives the MGIG mode.

All functions are pure: inputs are never modified in place.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgError

from mgig_lab.config import get_tolerances
from mgig_lab.core.exceptions import (
    DimMismatchError,
    NonPositiveDiagonalError,
    NotSpdError,
    NotSymmetricError,
    RankDeficientThetaError,
)
from mgig_lab.utils.type_definitions import (
    CholeskyFactors,
    EigenSym,
    FloatArray,
    SpdMatrix,
    SymMatrix,
    as_square,
)

logger = logging.getLogger(__name__)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🛡️ Checks
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def symmetrize(m: FloatArray) -> FloatArray:
    return 0.5 * (m + m.T)


def is_symmetric(m: FloatArray, tol: Optional[float] = None) -> bool:
    tol = get_tolerances().tol_sym if tol is None else tol
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    return bool(np.max(np.abs(m - m.T), initial=0.0) <= tol * scale)


def require_symmetric(m: FloatArray, name: str = "matrix") -> SymMatrix:
    """Return the symmetrized copy of ``m`` or raise NotSymmetricError."""
    m = as_square(m, name)
    if not is_symmetric(m):
        raise NotSymmetricError(
            f"{name} is not symmetric",
            {"max_asymmetry": float(np.max(np.abs(m - m.T)))},
        )
    return symmetrize(m)


def is_spd(m: FloatArray) -> bool:
    if not is_symmetric(m):
        return False
    values = np.linalg.eigvalsh(symmetrize(m))
    top = values[-1]
    return bool(top > 0 and values[0] > get_tolerances().eps_spd_rel * top)


def require_spd(m: FloatArray, name: str = "matrix") -> SpdMatrix:
    """
    Validate positive definiteness with a scale-free eigenvalue threshold.

    Args:
        m: Candidate matrix
        name: Used in error messages

    Returns:
        The symmetrized matrix

    Raises:
        NotSymmetricError: If ``m`` is not symmetric within tolerance
        NotSpdError: If the smallest eigenvalue is not above eps_spd_rel × largest
    """
    sym = require_symmetric(m, name)
    values = np.linalg.eigvalsh(sym)
    top = values[-1]
    if not (top > 0 and values[0] > get_tolerances().eps_spd_rel * top):
        raise NotSpdError(
            f"{name} is not positive definite",
            {"min_eig": float(values[0]), "max_eig": float(top)},
        )
    return sym


def numerical_rank(m: FloatArray, rel: Optional[float] = None) -> int:
    """Count singular values above ``rel`` times the largest one."""
    rel = get_tolerances().rank_rel if rel is None else rel
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] <= 0:
        return 0
    return int(np.sum(s > rel * s[0]))


def require_full_column_rank(theta: FloatArray) -> FloatArray:
    rank = numerical_rank(theta)
    if rank < theta.shape[1]:
        raise RankDeficientThetaError(
            "theta must have full column rank",
            {"rank": rank, "columns": int(theta.shape[1])},
        )
    return theta


def psd_factor(m: FloatArray) -> Tuple[FloatArray, int]:
    """
    Factor a symmetric PSD matrix as ΘΘᵀ with Θ of full column rank.

    Returns:
        (theta, rank); theta is p×rank, empty when rank is 0
    """
    eig = eigh_desc(symmetrize(m))
    top = eig.values[0] if eig.values.size else 0.0
    if top <= 0:
        return np.zeros((m.shape[0], 0)), 0
    keep = eig.values > get_tolerances().rank_rel * top
    rank = int(np.sum(keep))
    theta = eig.vectors[:, keep] * np.sqrt(eig.values[keep])
    return theta, rank


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧩 Packed unit-lower layout
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def block_slice(p: int, k: int) -> slice:
    """Position of column block k (0-based) inside the packed b vector."""
    start = k * p - k * (k + 1) // 2
    return slice(start, start + p - k - 1)


def pack_unit_lower(big_b: FloatArray) -> FloatArray:
    p = big_b.shape[0]
    if p == 1:
        return np.zeros(0)
    return np.concatenate([big_b[k + 1 :, k] for k in range(p - 1)])


def unit_lower_from_packed(b: FloatArray, p: int) -> FloatArray:
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.shape[0] != p * (p - 1) // 2:
        raise DimMismatchError(
            "packed b has the wrong length", {"p": p, "got": int(b.shape[0])}
        )
    big_b = np.eye(p)
    for k in range(p - 1):
        big_b[k + 1 :, k] = b[block_slice(p, k)]
    return big_b


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔺 Unit-diagonal Cholesky
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def cholesky_unit(sigma: SpdMatrix) -> CholeskyFactors:
    """
    Decompose Σ = B A Bᵀ with B unit lower triangular and A positive diagonal.

    Args:
        sigma: Symmetric positive definite matrix

    Returns:
        CholeskyFactors with a = diag(A) and b the packed columns of B

    Raises:
        NotSpdError: If a pivot is not positive during factorization

    Examples:
        >>> f = cholesky_unit(np.array([[2.0, 1.0], [1.0, 1.0]]))
        >>> f.a.tolist(), f.b.tolist()
        ([2.0, 0.5], [0.5])
    """
    sym = require_symmetric(sigma, "sigma")
    try:
        lower = scipy.linalg.cholesky(sym, lower=True)
    except LinAlgError as exc:
        raise NotSpdError("non-positive pivot in Cholesky factorization") from exc
    d = np.diag(lower).copy()
    if np.any(d <= 0):
        raise NotSpdError("non-positive pivot in Cholesky factorization")
    big_b = lower / d
    return CholeskyFactors(a=d * d, b=pack_unit_lower(big_b))


def reconstruct(f: CholeskyFactors) -> SpdMatrix:
    """Return B A Bᵀ; raises NonPositiveDiagonalError if any a_i ≤ 0."""
    if np.any(f.a <= 0):
        raise NonPositiveDiagonalError(
            "diagonal factors must be positive", {"min_a": float(np.min(f.a))}
        )
    big_b = unit_lower_from_packed(f.b, f.dim)
    return symmetrize((big_b * f.a) @ big_b.T)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🌀 Spectral functions
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def eigh_desc(m: SymMatrix) -> EigenSym:
    """Symmetric eigendecomposition, eigenvalues descending, ties by index."""
    values, vectors = scipy.linalg.eigh(m)
    order = np.argsort(-values, kind="stable")
    return EigenSym(values=values[order], vectors=vectors[:, order])


def _spectral_map(m: SymMatrix, fn) -> FloatArray:  # type: ignore[no-untyped-def]
    eig = eigh_desc(m)
    return symmetrize((eig.vectors * fn(eig.values)) @ eig.vectors.T)


def matrix_log_spd(m: SpdMatrix) -> SymMatrix:
    """Unique symmetric V with exp(V) = m."""
    return _spectral_map(require_spd(m, "m"), np.log)


def matrix_exp_sym(v: SymMatrix) -> SpdMatrix:
    """Matrix exponential of a symmetric matrix (always SPD)."""
    return _spectral_map(require_symmetric(v, "v"), np.exp)


def spd_sqrt(m: SpdMatrix) -> SpdMatrix:
    """The SPD square root of an SPD matrix."""
    return _spectral_map(require_spd(m, "m"), np.sqrt)


def spd_inverse(m: SpdMatrix) -> SpdMatrix:
    """Inverse through a Cholesky solve; input assumed SPD."""
    try:
        factor = scipy.linalg.cho_factor(m, lower=True)
    except LinAlgError as exc:
        raise NotSpdError("matrix is not positive definite") from exc
    return symmetrize(scipy.linalg.cho_solve(factor, np.eye(m.shape[0])))


def logdet_spd(m: SpdMatrix) -> float:
    try:
        lower = scipy.linalg.cholesky(m, lower=True)
    except LinAlgError as exc:
        raise NotSpdError("matrix is not positive definite") from exc
    return float(2.0 * np.sum(np.log(np.diag(lower))))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎯 Riccati mode solver
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def solve_riccati(lambda_: float, psi: SpdMatrix, gamma: SpdMatrix) -> SpdMatrix:
    """
    Solve 2λΛ - ΛΨΛ + Γ = 0 for the unique SPD Λ.

    With Ψ = LLᵀ the substitution Z = LᵀΛL turns the equation into
    Z² - 2λZ = LᵀΓL, whose SPD root is Z = λI + (λ²I + LᵀΓL)^(1/2).

    Args:
        lambda_: Order parameter λ
        psi: SPD matrix Ψ
        gamma: SPD matrix Γ

    Returns:
        Λ₀ = L⁻ᵀ Z L⁻¹, the mode of MGIG(λ, Ψ, Γ)

    Raises:
        NotSpdError: If either matrix is not SPD
        DimMismatchError: If the matrices have different shapes
    """
    psi = require_spd(psi, "psi")
    gamma = require_spd(gamma, "gamma")
    if psi.shape != gamma.shape:
        raise DimMismatchError(
            "psi and gamma must share a dimension",
            {"psi": psi.shape, "gamma": gamma.shape},
        )
    mode = _riccati_closed_form(float(lambda_), psi, gamma)
    if not riccati_converged(lambda_, mode, psi, gamma):
        logger.warning(
            "Riccati mode residual above riccati_rel: %.3e",
            float(np.max(np.abs(riccati_residual(lambda_, mode, psi, gamma)))),
        )
    return mode


def _riccati_closed_form(lam: float, psi: FloatArray, gamma: FloatArray) -> FloatArray:
    p = psi.shape[0]
    lower = scipy.linalg.cholesky(psi, lower=True)
    core = symmetrize(lower.T @ gamma @ lower)
    z = lam * np.eye(p) + _spectral_map(lam * lam * np.eye(p) + core, np.sqrt)
    # Λ₀ = L⁻ᵀ Z L⁻¹
    left = scipy.linalg.solve_triangular(lower, z, lower=True, trans="T")
    lam0 = scipy.linalg.solve_triangular(lower, left.T, lower=True, trans="T")
    return symmetrize(lam0)


def riccati_residual(
    lambda_: float, sigma: FloatArray, psi: FloatArray, gamma: FloatArray
) -> FloatArray:
    """2λΣ - ΣΨΣ + Γ, zero at the MGIG mode."""
    return 2.0 * lambda_ * sigma - sigma @ psi @ sigma + gamma


def riccati_converged(
    lambda_: float, sigma: FloatArray, psi: FloatArray, gamma: FloatArray
) -> bool:
    """True when max|residual| ≤ riccati_rel · max(1, max|Γ|, max|ΣΨΣ|)."""
    scale = max(1.0, float(np.max(np.abs(gamma))), float(np.max(np.abs(sigma @ psi @ sigma))))
    residual = riccati_residual(lambda_, sigma, psi, gamma)
    return float(np.max(np.abs(residual))) <= get_tolerances().riccati_rel * scale
