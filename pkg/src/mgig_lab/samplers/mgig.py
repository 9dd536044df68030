#!/usr/bin/env python3
"""
MGIG transition kernels.

MGIG_p(λ, Ψ, Γ) has density ∝ |Σ|^λ etr(-(ΨΣ + ΓΣ⁻¹)/2) on p×p SPD matrices.

Four kernels leave it invariant:

* ``gibbs_step``: blocked Gibbs over the unit-diagonal Cholesky coordinates
  Σ = B A Bᵀ. The diagonal a is drawn from p independent GIG laws, then the
  columns b_1..b_{p-1} of B from multivariate normals, updating the factor
  products M, M̄, R, R̄ recursively so each block costs O(p²).
* ``mh1_step``: independent MH with a Wishart(2λ+p+1, Ψ⁻¹) proposal.
* ``mh2_step``: independent MH with a Wishart proposal whose mode is the MGIG
  mode Λ₀ (the SPD root of 2λΛ - ΛΨΛ + Γ = 0).
* ``hr_step``: hit-and-run in matrix-log coordinates.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from mgig_lab.config import get_tolerances
from mgig_lab.core.exceptions import (
    DimMismatchError,
    IndexOutOfRangeError,
    LambdaTooSmallError,
)
from mgig_lab.core.matrix_core import (
    block_slice,
    matrix_exp_sym,
    matrix_log_spd,
    reconstruct,
    require_spd,
    solve_riccati,
    spd_inverse,
    symmetrize,
    unit_lower_from_packed,
)
from mgig_lab.core.random_core import (
    RngStream,
    sample_gig,
    sample_mvn_precision,
    sample_wishart,
    wishart_log_density,
)
from mgig_lab.utils.type_definitions import (
    ChainStep,
    CholeskyFactors,
    FloatArray,
    GigParams,
    MgigParams,
    MvnPrecisionParams,
    SpdMatrix,
    WishartParams,
    as_float_array,
)

logger = logging.getLogger(__name__)

BlockHook = Callable[[int, MvnPrecisionParams, FloatArray, FloatArray], None]


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📐 Density and parameter transforms
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def log_density_unnorm(sigma: SpdMatrix, params: MgigParams) -> float:
    """
    λ·log|Σ| - tr(ΨΣ + ΓΣ⁻¹)/2.

    Raises:
        DimMismatchError: If Σ and the parameters differ in dimension
        NotSpdError: If Σ is not SPD
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (params.dim, params.dim):
        raise DimMismatchError(
            "sigma does not match the parameter dimension",
            {"sigma": sigma.shape, "p": params.dim},
        )
    sigma = require_spd(sigma, "sigma")
    lower = scipy.linalg.cholesky(sigma, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.diag(lower))))
    sigma_inv = scipy.linalg.cho_solve((lower, True), np.eye(params.dim))
    trace = float(np.sum(params.psi * sigma) + np.sum(params.gamma * sigma_inv))
    return params.lambda_ * logdet - 0.5 * trace


def invert_params(params: MgigParams) -> MgigParams:
    """Law of Σ⁻¹ when Σ ~ MGIG(λ, Ψ, Γ): MGIG(-λ-(p+1), Γ, Ψ)."""
    return MgigParams(-params.lambda_ - (params.dim + 1), params.gamma, params.psi)


def canonicalize(params: MgigParams) -> Tuple[MgigParams, bool]:
    """
    Move λ above -(p+1)/2 through the inversion property.

    Returns:
        (params', inverted). When ``inverted`` is True, draws from params'
        must be inverted to obtain draws from ``params``.
    """
    if params.lambda_ <= -(params.dim + 1) / 2.0:
        return invert_params(params), True
    return params, False


def log_joint_cholesky(a: FloatArray, b: FloatArray, params: MgigParams) -> float:
    """Target density of the Gibbs sampler in (a, b) coordinates, unnormalized."""
    f = CholeskyFactors(a, b)
    if f.dim != params.dim:
        raise DimMismatchError("factors do not match the parameter dimension")
    jacobian = float(np.sum((params.dim - 1 - np.arange(f.dim)) * np.log(f.a)))
    return log_density_unnorm(reconstruct(f), params) + jacobian


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧱 Full conditionals
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _unit_lower_inverse(big_b: FloatArray) -> FloatArray:
    return scipy.linalg.solve_triangular(
        big_b, np.eye(big_b.shape[0]), lower=True, unit_diagonal=True
    )


def _a_conditionals(
    big_b: FloatArray, b_inv: FloatArray, params: MgigParams
) -> List[GigParams]:
    p = params.dim
    psi_diag = np.einsum("ji,jk,ki->i", big_b, params.psi, big_b)
    gamma_diag = np.einsum("ij,jk,ik->i", b_inv, params.gamma, b_inv)
    return [
        GigParams(params.lambda_ + p - i, float(psi_diag[i]), float(gamma_diag[i]))
        for i in range(p)
    ]


def cond_a_params(b: FloatArray, params: MgigParams) -> List[GigParams]:
    """
    Conditional laws of a_1..a_p given b.

    a_i | b ~ GIG(λ + p - i + 1, (BᵀΨB)_ii, (B⁻¹ΓB⁻ᵀ)_ii), i = 1..p,
    independently.
    """
    b = as_float_array(b, "b").reshape(-1)
    big_b = unit_lower_from_packed(b, params.dim)
    return _a_conditionals(big_b, _unit_lower_inverse(big_b), params)


def _block_terms(
    k: int,
    a: FloatArray,
    psi: FloatArray,
    m: FloatArray,
    m_bar: FloatArray,
    r: FloatArray,
    r_bar: FloatArray,
    q_sub: FloatArray,
) -> MvnPrecisionParams:
    sub = slice(k + 1, a.shape[0])
    precision = a[k] * psi[sub, sub] + m_bar[k, k] * q_sub
    linear = -m[sub, :] @ (r @ r[k, :]) + r_bar[sub, :] @ (r_bar.T @ m_bar[:, k])
    return MvnPrecisionParams(linear, symmetrize(precision))


def cond_b_params(
    i: int, a: FloatArray, b: FloatArray, params: MgigParams
) -> MvnPrecisionParams:
    """
    Conditional law of column block b_i (1-based) given a and the other blocks.

    Writing B = E_1⋯E_{p-1} with E_j = I + b_j e_jᵀ, the products are
    M_i = PᵀΨP and M̄_i = P⁻¹ΓP⁻ᵀ with P = E_1⋯E_{i-1}, and
    R_i = S A^(1/2), R̄_i = S⁻ᵀA^(-1/2) with S = E_{i+1}⋯E_{p-1}.

    Returns:
        (n_i, N_i) with N_i = a_i Ψ_sub + (M̄_i)_ii (R̄_i R̄_iᵀ)_sub and
        n_i = -(M_i)_sub R_i (R_i)_iᵀ + (R̄_i)_sub R̄_iᵀ (M̄_i)_{:,i}

    Raises:
        IndexOutOfRangeError: If i is outside 1..p-1
    """
    p = params.dim
    if not 1 <= i <= p - 1:
        raise IndexOutOfRangeError(
            "block index must lie in 1..p-1", {"i": i, "p": p}
        )
    a = as_float_array(a, "a").reshape(-1)
    b = as_float_array(b, "b").reshape(-1)
    if a.shape[0] != p:
        raise DimMismatchError("a has the wrong length", {"p": p, "got": a.shape[0]})
    k = i - 1
    big_b = unit_lower_from_packed(b, p)
    before = np.eye(p)
    after = np.eye(p)
    for j in range(p - 1):
        if j < k:
            before[j + 1 :, j] = big_b[j + 1 :, j]
        elif j > k:
            after[j + 1 :, j] = big_b[j + 1 :, j]
    before_inv = _unit_lower_inverse(before)
    after_inv = _unit_lower_inverse(after)
    m = before.T @ params.psi @ before
    m_bar = before_inv @ params.gamma @ before_inv.T
    r = after * np.sqrt(a)
    r_bar = after_inv.T / np.sqrt(a)
    q_sub = (r_bar @ r_bar.T)[k + 1 :, k + 1 :]
    return _block_terms(k, a, params.psi, m, m_bar, r, r_bar, q_sub)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔁 Blocked Gibbs sampler
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def gibbs_step(
    state: CholeskyFactors,
    params: MgigParams,
    rng: RngStream,
    on_block: Optional[BlockHook] = None,
) -> CholeskyFactors:
    """
    One full scan: all a_i, then b_1, ..., b_{p-1} in order.

    Args:
        state: Current (a, b)
        params: Target parameters
        rng: Stream supplying the randomness
        on_block: Optional callback ``(k, conditional, a, b)`` invoked before
            block k (0-based) is drawn, with the current a and packed b

    Returns:
        The new factors
    """
    p = params.dim
    if state.dim != p:
        raise DimMismatchError("state does not match the parameter dimension")
    big_b = unit_lower_from_packed(state.b, p)
    b_inv = _unit_lower_inverse(big_b)

    a_new = np.array(
        [sample_gig(g, rng) for g in _a_conditionals(big_b, b_inv, params)]
    )
    if p == 1:
        return CholeskyFactors(a_new, state.b.copy())

    b_new = state.b.copy()
    sqrt_a = np.sqrt(a_new)
    # Q* = B⁻ᵀ A*⁻¹ B⁻¹ with the pre-scan B; its trailing blocks never change.
    q_star = b_inv.T @ (b_inv / a_new[:, None])

    u0 = np.zeros(p)
    u0[1:] = big_b[1:, 0]
    m = params.psi.copy()
    m_bar = params.gamma.copy()
    r = (big_b - np.outer(u0, big_b[0, :])) * sqrt_a
    r_bar = b_inv.T.copy()
    r_bar[0, :] += u0 @ b_inv.T
    r_bar /= sqrt_a

    for k in range(p - 1):
        sub = slice(k + 1, p)
        cond = _block_terms(k, a_new, params.psi, m, m_bar, r, r_bar, q_star[sub, sub])
        if on_block is not None:
            on_block(k, cond, a_new.copy(), b_new.copy())
        draw = sample_mvn_precision(cond, rng)
        b_new[block_slice(p, k)] = draw

        u = np.zeros(p)
        u[sub] = draw
        # M ← EᵀME, E = I + u e_kᵀ
        mb = m.copy()
        mb[:, k] += m @ u
        mb[k, :] += u @ mb
        m = mb
        # M̄ ← E⁻¹M̄E⁻ᵀ
        m_bar = (
            m_bar
            - np.outer(u, m_bar[k, :])
            - np.outer(m_bar[:, k], u)
            + m_bar[k, k] * np.outer(u, u)
        )
        if k + 1 < p - 1:
            u_next = np.zeros(p)
            u_next[k + 2 :] = big_b[k + 2 :, k + 1]
            r = r - np.outer(u_next, r[k + 1, :])
            r_bar[k + 1, :] += u_next @ r_bar

    return CholeskyFactors(a_new, b_new)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎯 Metropolis-Hastings kernels
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _decide(
    old: SpdMatrix, new: SpdMatrix, log_ratio: float, rng: RngStream
) -> ChainStep:
    log_accept = min(0.0, log_ratio) if not math.isnan(log_ratio) else -math.inf
    u = rng.uniform()
    accepted = log_accept >= 0.0 or (u > 0.0 and math.log(u) < log_accept)
    logger.debug("MH log-ratio %.6g accepted=%s", log_ratio, accepted)
    return ChainStep(
        sigma=new if accepted else old,
        accepted=accepted,
        log_accept_prob=log_accept,
        log_ratio=log_ratio,
    )


def _require_wishart_order(params: MgigParams) -> None:
    if not params.lambda_ > -1.0:
        raise LambdaTooSmallError(
            "Wishart-proposal kernels need λ > -1", {"lambda": params.lambda_}
        )


def mh1_proposal(params: MgigParams) -> WishartParams:
    _require_wishart_order(params)
    return WishartParams(2.0 * params.lambda_ + params.dim + 1, spd_inverse(params.psi))


def mh1_log_ratio(old: SpdMatrix, new: SpdMatrix, params: MgigParams) -> float:
    """-tr Γ(Σ_new⁻¹ - Σ_old⁻¹)/2."""
    diff = spd_inverse(new) - spd_inverse(old)
    return -0.5 * float(np.sum(params.gamma * diff))


def mh1_step(
    state: SpdMatrix,
    params: MgigParams,
    rng: RngStream,
    proposal: Optional[SpdMatrix] = None,
) -> ChainStep:
    """
    Independent MH with proposal W_p(2λ+p+1, Ψ⁻¹).

    Args:
        state: Current Σ
        params: Target parameters
        rng: Stream supplying the randomness
        proposal: Forced Σ_new; drawn from the proposal when omitted

    Raises:
        LambdaTooSmallError: If λ ≤ -1
    """
    wishart = mh1_proposal(params)
    new = sample_wishart(wishart, rng) if proposal is None else proposal
    return _decide(state, new, mh1_log_ratio(state, new, params), rng)


class ModeCache:
    """Per-chain memo of the MGIG mode Λ₀, keyed by parameter value."""

    def __init__(self) -> None:
        self._modes: Dict[Tuple[float, bytes, bytes], SpdMatrix] = {}

    def mode(self, params: MgigParams) -> SpdMatrix:
        key = params.cache_key()
        if key not in self._modes:
            self._modes[key] = solve_riccati(params.lambda_, params.psi, params.gamma)
        return self._modes[key]

    def __len__(self) -> int:
        return len(self._modes)


def mh2_proposal(
    params: MgigParams, rho: float, cache: Optional[ModeCache] = None
) -> WishartParams:
    """W_p(ρ₀, Λ₀/ρ) with ρ₀ = p + 1 + ρ; its mode (ρ₀-p-1)·Λ₀/ρ is Λ₀."""
    mode = (cache if cache is not None else ModeCache()).mode(params)
    return WishartParams(params.dim + 1 + rho, mode / rho)


def mh2_log_ratio(
    old: SpdMatrix, new: SpdMatrix, params: MgigParams, proposal: WishartParams
) -> float:
    target = log_density_unnorm(new, params) - log_density_unnorm(old, params)
    q_new = wishart_log_density(new, proposal.dof, proposal.scale)
    q_old = wishart_log_density(old, proposal.dof, proposal.scale)
    return target - (q_new - q_old)


def mh2_step(
    state: SpdMatrix,
    params: MgigParams,
    rho: float,
    rng: RngStream,
    cache: Optional[ModeCache] = None,
    proposal: Optional[SpdMatrix] = None,
) -> ChainStep:
    """Independent MH with a Wishart proposal centred on the MGIG mode."""
    _require_wishart_order(params)
    wishart = mh2_proposal(params, rho, cache)
    new = sample_wishart(wishart, rng) if proposal is None else proposal
    return _decide(state, new, mh2_log_ratio(state, new, params, wishart), rng)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🏃 Hit-and-run in log coordinates
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def log_exp_jacobian(sigma: SpdMatrix) -> float:
    """
    log |dΣ/d log Σ| at Σ with eigenvalues d_1..d_p.

    Σ_i log d_i + Σ_{i<j} log[(d_i - d_j)/(log d_i - log d_j)]; a pair whose
    eigenvalues agree to coincident_rel uses the limit value d_i.
    The Σ_i log d_i part is the Jacobian of the eigenvalue map d_i = exp(ℓ_i);
    the pair terms come from the eigenvector rotation.
    """
    d = np.linalg.eigvalsh(symmetrize(sigma))
    log_d = np.log(d)
    rel = get_tolerances().coincident_rel
    total = float(np.sum(log_d))
    p = d.shape[0]
    for i in range(p):
        for j in range(i + 1, p):
            gap = d[j] - d[i]
            if abs(gap) < rel * max(d[i], d[j]):
                total += float(log_d[j])
            else:
                total += math.log(gap / (log_d[j] - log_d[i]))
    return total


def hr_log_ratio(old: SpdMatrix, new: SpdMatrix, params: MgigParams) -> float:
    target = log_density_unnorm(new, params) - log_density_unnorm(old, params)
    return target + log_exp_jacobian(new) - log_exp_jacobian(old)


def hr_direction(p: int, rng: RngStream) -> FloatArray:
    """V = v·𝓛/√(Σ_{i≤j} l_ij²) with l_ij and v i.i.d. standard normal."""
    iu = np.triu_indices(p)
    entries = rng.standard_normal(iu[0].shape[0])
    v = float(rng.standard_normal())
    big_l = np.zeros((p, p))
    big_l[iu] = entries
    big_l = big_l + np.triu(big_l, 1).T
    return v * big_l / math.sqrt(float(np.sum(entries * entries)))


def hr_propose(sigma: SpdMatrix, direction: FloatArray) -> SpdMatrix:
    return matrix_exp_sym(matrix_log_spd(sigma) + direction)


def hr_step(
    state: SpdMatrix,
    params: MgigParams,
    rng: RngStream,
    direction: Optional[FloatArray] = None,
) -> ChainStep:
    """
    Hit-and-run step Σ_new = exp(log Σ + V).

    The proposal is symmetric in log coordinates, so the acceptance ratio is
    the target ratio times the ratio of exp-map Jacobians.
    """
    v = hr_direction(params.dim, rng) if direction is None else direction
    new = hr_propose(state, v)
    return _decide(state, new, hr_log_ratio(state, new, params), rng)
