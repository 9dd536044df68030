#!/usr/bin/env python3
"""
Chain orchestration and degenerate-parameter composition.

``sample_chain`` runs one kernel with burn-in and thinning and records the
draws. ``sample_via_matsumoto_yor`` draws from MGIG_p(λ, Ψ, ΘΘᵀ) with a
rank-deficient Γ by composing a q-dimensional MGIG draw with a Wishart draw.
"""

import logging
import time
from typing import List, Optional, Union

import numpy as np

from mgig_lab.config import DEFAULT_INNER_ITERS
from mgig_lab.core.exceptions import InvalidParamsError, LambdaTooSmallError
from mgig_lab.core.matrix_core import (
    cholesky_unit,
    psd_factor,
    reconstruct,
    require_spd,
    solve_riccati,
    spd_inverse,
    symmetrize,
)
from mgig_lab.core.random_core import RngStream, sample_gig, sample_wishart
from mgig_lab.samplers.mgig import (
    ModeCache,
    gibbs_step,
    hr_step,
    mh1_step,
    mh2_step,
)
from mgig_lab.utils.type_definitions import (
    Chain,
    ChainStep,
    CholeskyFactors,
    DegenerateMgigParams,
    FloatArray,
    GigParams,
    MgigParams,
    SamplerKind,
    SamplerName,
    SpdMatrix,
    WishartParams,
)

logger = logging.getLogger(__name__)

State = Union[CholeskyFactors, SpdMatrix]


class KernelRunner:
    """
    Stateful driver for one kernel on one parameter set.

    Holds the current state in the kernel's natural coordinates (Cholesky
    factors for GS, the matrix itself otherwise) and the MH2 mode cache.
    """

    def __init__(
        self, params: MgigParams, kind: SamplerKind, init: SpdMatrix, rng: RngStream
    ):
        if kind.needs_wishart_proposal and not params.lambda_ > -1.0:
            raise LambdaTooSmallError(
                f"{kind.label} needs λ > -1", {"lambda": params.lambda_}
            )
        self.params = params
        self.kind = kind
        self.rng = rng
        self.cache = ModeCache()
        init = require_spd(init, "init")
        self.state: State = cholesky_unit(init) if kind.name is SamplerName.GS else init

    @property
    def sigma(self) -> SpdMatrix:
        if isinstance(self.state, CholeskyFactors):
            return reconstruct(self.state)
        return self.state

    def step(self) -> ChainStep:
        name = self.kind.name
        if name is SamplerName.GS:
            assert isinstance(self.state, CholeskyFactors)
            self.state = gibbs_step(self.state, self.params, self.rng)
            return ChainStep(sigma=reconstruct(self.state))
        assert isinstance(self.state, np.ndarray)
        if name is SamplerName.MH1:
            result = mh1_step(self.state, self.params, self.rng)
        elif name is SamplerName.MH2:
            rho = float(self.kind.rho)  # type: ignore[arg-type]
            result = mh2_step(self.state, self.params, rho, self.rng, self.cache)
        else:
            result = hr_step(self.state, self.params, self.rng)
        self.state = result.sigma
        return result


def default_init(params: MgigParams) -> SpdMatrix:
    """The MGIG mode when λ > -1, the identity otherwise."""
    if params.lambda_ > -1.0:
        return solve_riccati(params.lambda_, params.psi, params.gamma)
    return np.eye(params.dim)


def sample_chain(
    params: MgigParams,
    kind: SamplerKind,
    n_iter: int,
    burn_in: int,
    thin: int,
    rng: RngStream,
    init: Optional[SpdMatrix] = None,
) -> Chain:
    """
    Run ``n_iter`` transitions and keep every ``thin``-th one after burn-in.

    Iteration t (0-based) is recorded when t ≥ burn_in and
    (t - burn_in) is a multiple of ``thin``. Wall time covers the transition
    loop only.

    Args:
        params: Target parameters
        kind: Kernel choice
        n_iter: Total transitions, greater than burn_in
        burn_in: Discarded leading transitions
        thin: Recording stride, at least 1
        rng: Stream owned by this chain
        init: Starting Σ; defaults to :func:`default_init`

    Returns:
        The recorded chain with acceptance bookkeeping

    Raises:
        InvalidParamsError: On inconsistent run lengths
        LambdaTooSmallError: If an MH kernel is asked to run with λ ≤ -1
    """
    if not (n_iter > burn_in >= 0 and thin >= 1):
        raise InvalidParamsError(
            "need n_iter > burn_in >= 0 and thin >= 1",
            {"n_iter": n_iter, "burn_in": burn_in, "thin": thin},
        )
    start = default_init(params) if init is None else init
    runner = KernelRunner(params, kind, start, rng)

    steps: List[ChainStep] = []
    accepted = 0
    # ESS per second is measured over the recorded segment only
    began = time.perf_counter()
    for t in range(n_iter):
        if t == burn_in:
            began = time.perf_counter()
        result = runner.step()
        accepted += int(result.accepted)
        if t >= burn_in and (t - burn_in) % thin == 0:
            steps.append(result)
    elapsed = time.perf_counter() - began

    logger.debug(
        "%s chain p=%d: %d recorded, acceptance %.3f, %.3fs",
        kind.label,
        params.dim,
        len(steps),
        accepted / n_iter,
        elapsed,
    )
    return Chain(
        steps=steps,
        params=params,
        kind=kind,
        burn_in=burn_in,
        thin=thin,
        n_iter=n_iter,
        wall_seconds=elapsed,
        accept_count=accepted,
    )


def advance(
    sigma: SpdMatrix,
    params: MgigParams,
    kind: SamplerKind,
    n_steps: int,
    rng: RngStream,
) -> SpdMatrix:
    """Apply ``n_steps`` transitions from ``sigma`` and return the final state."""
    runner = KernelRunner(params, kind, sigma, rng)
    for _ in range(n_steps):
        runner.step()
    return runner.sigma


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧬 Matsumoto-Yor composition
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _inner_draw(
    lam: float,
    reduced_psi: SpdMatrix,
    rng: RngStream,
    inner_kind: SamplerKind,
    inner_iters: int,
) -> SpdMatrix:
    """X ~ MGIG_q(-λ-1-q, ΘᵀΨΘ, I_q)."""
    q = reduced_psi.shape[0]
    if q == 1:
        x = sample_gig(GigParams(-lam - 1.0, float(reduced_psi[0, 0]), 1.0), rng)
        return np.array([[x]])
    if inner_kind.needs_wishart_proposal:
        # The inner order is below -1; run on X⁻¹ ~ MGIG_q(λ, I, ΘᵀΨΘ) instead.
        inverse_params = MgigParams(lam, np.eye(q), reduced_psi)
        y = sample_chain(
            inverse_params, inner_kind, inner_iters, inner_iters - 1, 1, rng
        ).steps[-1].sigma
        return spd_inverse(y)
    inner = MgigParams(-lam - 1.0 - q, reduced_psi, np.eye(q))
    return sample_chain(inner, inner_kind, inner_iters, inner_iters - 1, 1, rng).steps[
        -1
    ].sigma


def sample_via_matsumoto_yor(
    params: DegenerateMgigParams,
    rng: RngStream,
    inner_kind: Optional[SamplerKind] = None,
    inner_iters: int = DEFAULT_INNER_ITERS,
) -> SpdMatrix:
    """
    Draw Σ ~ MGIG_p(λ, Ψ, ΘΘᵀ) as ΘXΘᵀ + Y.

    X ~ MGIG_q(-λ-1-q, ΘᵀΨΘ, I) and Y ~ W_p(2λ+p+1, Ψ⁻¹) are independent.
    For q = 1, X is a single GIG(-λ-1, ΘᵀΨΘ, 1) draw; otherwise X is the last
    state of an ``inner_iters``-step chain of ``inner_kind`` (GS by default).

    Raises:
        InvalidParamsError: If inner_iters < 1
    """
    if inner_iters < 1:
        raise InvalidParamsError("inner_iters must be at least 1")
    kind = inner_kind or SamplerKind.gs()
    theta = params.theta
    reduced_psi = symmetrize(theta.T @ params.psi @ theta)
    x = _inner_draw(params.lambda_, reduced_psi, rng, kind, inner_iters)
    y = sample_wishart(
        WishartParams(
            2.0 * params.lambda_ + params.dim + 1, spd_inverse(params.psi)
        ),
        rng,
    )
    return symmetrize(theta @ x @ theta.T + y)


def sample_singular_gamma(
    lambda_: float,
    psi: SpdMatrix,
    gamma: FloatArray,
    rng: RngStream,
    inner_kind: Optional[SamplerKind] = None,
    inner_iters: int = DEFAULT_INNER_ITERS,
) -> SpdMatrix:
    """
    Draw from MGIG_p(λ, Ψ, Γ) with Γ positive semidefinite and singular.

    Γ = 0 gives the Wishart law W_p(2λ+p+1, Ψ⁻¹); otherwise Γ is factored as
    ΘΘᵀ and the Matsumoto-Yor composition is used.

    Raises:
        LambdaTooSmallError: If λ ≤ -1
    """
    if not lambda_ > -1.0:
        raise LambdaTooSmallError(
            "singular gamma needs λ > -1", {"lambda": float(lambda_)}
        )
    theta, rank = psd_factor(gamma)
    if rank == 0:
        p = psi.shape[0]
        return sample_wishart(
            WishartParams(2.0 * lambda_ + p + 1, spd_inverse(psi)), rng
        )
    return sample_via_matsumoto_yor(
        DegenerateMgigParams(lambda_, psi, theta), rng, inner_kind, inner_iters
    )


def sample_matsumoto_yor_draws(
    params: DegenerateMgigParams,
    n_draws: int,
    rng: RngStream,
    inner_kind: Optional[SamplerKind] = None,
    inner_iters: int = DEFAULT_INNER_ITERS,
) -> FloatArray:
    """``n_draws`` independent composed draws stacked as (n, p, p)."""
    return np.stack(
        [
            sample_via_matsumoto_yor(params, rng, inner_kind, inner_iters)
            for _ in range(n_draws)
        ]
    )
