#!/usr/bin/env python3
"""
Average acceptance rate of the Wishart-proposal (MH1) kernel.

With Σ_old ~ MGIG(λ, Ψ, Γ) and Σ_new ~ W(2λ+p+1, Ψ⁻¹) independent,
AAR = E[min(1, exp(-tr Γ(Σ_new⁻¹ - Σ_old⁻¹)/2))] = 2·P[tr ΓΣ_old⁻¹ ≤ tr ΓΣ_new⁻¹].
The probability form is the primary estimate; the expectation form is
reported alongside it.
"""

import logging
import math

import numpy as np

from mgig_lab.config import DEFAULT_GS_SUBSAMPLE_GAP, MIN_AAR_PAIRS
from mgig_lab.core.exceptions import InvalidParamsError, LambdaTooSmallError
from mgig_lab.core.matrix_core import spd_inverse
from mgig_lab.core.random_core import RngStream, sample_wishart
from mgig_lab.samplers.chain import sample_chain
from mgig_lab.samplers.mgig import mh1_proposal
from mgig_lab.utils.type_definitions import (
    AarEstimate,
    FloatArray,
    MgigParams,
    SamplerKind,
    SpdMatrix,
)

logger = logging.getLogger(__name__)

# Scans discarded before the first recorded Σ_old, in units of the gap.
BURN_IN_GAPS = 10


def aar_indicator(gamma: SpdMatrix, sigma_old: SpdMatrix, sigma_new: SpdMatrix) -> bool:
    """tr(ΓΣ_old⁻¹) ≤ tr(ΓΣ_new⁻¹)."""
    return _trace_gamma_inv(gamma, sigma_old) <= _trace_gamma_inv(gamma, sigma_new)


def _trace_gamma_inv(gamma: SpdMatrix, sigma: SpdMatrix) -> float:
    return float(np.sum(gamma * spd_inverse(sigma)))


def estimate_aar(
    params: MgigParams,
    n_pairs: int,
    rng: RngStream,
    gs_subsample_gap: int = DEFAULT_GS_SUBSAMPLE_GAP,
) -> AarEstimate:
    """
    Monte Carlo AAR estimate.

    Σ_new are i.i.d. Wishart draws; Σ_old come from a Gibbs chain thinned by
    ``gs_subsample_gap`` scans. The two streams use independent children of
    ``rng``.

    Args:
        params: Target parameters, λ > -1
        n_pairs: Number of (Σ_old, Σ_new) pairs, at least MIN_AAR_PAIRS
        rng: Stream supplying the randomness
        gs_subsample_gap: Gibbs scans between recorded Σ_old

    Returns:
        AarEstimate with value = 2p̂ and s.e. 2√(p̂(1-p̂)/n)

    Raises:
        LambdaTooSmallError: If λ ≤ -1
        InvalidParamsError: If n_pairs or the gap is too small
    """
    if not params.lambda_ > -1.0:
        raise LambdaTooSmallError("AAR needs λ > -1", {"lambda": params.lambda_})
    if n_pairs < MIN_AAR_PAIRS:
        raise InvalidParamsError(
            "too few AAR pairs", {"n_pairs": n_pairs, "minimum": MIN_AAR_PAIRS}
        )
    if gs_subsample_gap < 1:
        raise InvalidParamsError("gs_subsample_gap must be at least 1")

    proposal = mh1_proposal(params)
    new_rng = rng.child(0)
    old_rng = rng.child(1)
    burn_in = BURN_IN_GAPS * gs_subsample_gap
    chain = sample_chain(
        params,
        SamplerKind.gs(),
        n_iter=burn_in + gs_subsample_gap * n_pairs,
        burn_in=burn_in,
        thin=gs_subsample_gap,
        rng=old_rng,
    )

    traces_old = np.array(
        [_trace_gamma_inv(params.gamma, step.sigma) for step in chain.steps[:n_pairs]]
    )
    traces_new = np.array(
        [
            _trace_gamma_inv(params.gamma, sample_wishart(proposal, new_rng))
            for _ in range(n_pairs)
        ]
    )
    return summarize_pairs(traces_old, traces_new)


def summarize_pairs(traces_old: FloatArray, traces_new: FloatArray) -> AarEstimate:
    """Both AAR forms from paired values of tr(ΓΣ⁻¹)."""
    n = int(traces_old.shape[0])
    p_hat = float(np.mean(traces_old <= traces_new))
    log_ratio = -0.5 * (traces_new - traces_old)
    expectation = float(np.mean(np.exp(np.minimum(0.0, log_ratio))))
    estimate = AarEstimate(
        value=2.0 * p_hat,
        mc_std_error=2.0 * math.sqrt(p_hat * (1.0 - p_hat) / n),
        n_pairs=n,
        expectation_value=expectation,
    )
    logger.debug("AAR %.4f ± %.4f over %d pairs", estimate.value, estimate.mc_std_error, n)
    return estimate
