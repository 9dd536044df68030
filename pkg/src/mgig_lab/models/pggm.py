#!/usr/bin/env python3
"""
Sparse partial Gaussian graphical model.

    Y_i | Δ, Ω_y ~ N_q(Ω_y⁻¹ Δ x_i, Ω_y⁻¹),               i = 1..n
    Δ_k | Ω_y, λ_k, π ~ (1-π) N_q(0, λ_k Ω_y) + π δ_0,     k = 1..p
    λ_k ~ Ga(α, ℓ_k),  Ω_y ~ W_q(u, V),  π ~ Be(a, b)

The Gibbs sampler updates each column Δ_k (spike or slab), each λ_k, π, and
finally Ω_y from its MGIG full conditional. The Ω_y update is pluggable:
blocked Gibbs scans, one MH1 or hit-and-run step, or mode imputation (MI),
which plugs in the conditional mode and is not a valid MCMC move.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit, gammaln

from mgig_lab.config import DEFAULT_INNER_ITERS, DEFAULT_OMEGA_GS_SCANS, get_tolerances
from mgig_lab.core.exceptions import DimMismatchError, InvalidParamsError
from mgig_lab.core.matrix_core import (
    is_spd,
    logdet_spd,
    numerical_rank,
    require_spd,
    solve_riccati,
    spd_inverse,
    symmetrize,
)
from mgig_lab.core.random_core import (
    RngStream,
    sample_gig,
    sample_mvn_precision,
    wishart_log_density,
)
from mgig_lab.diagnostics.ess import ess_detail
from mgig_lab.samplers.chain import advance, sample_singular_gamma
from mgig_lab.utils.type_definitions import (
    FloatArray,
    GigParams,
    MgigConditional,
    MgigParams,
    MvnPrecisionParams,
    SamplerKind,
    SpdMatrix,
    as_float_array,
)

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)

ORDER_DERIVED = "derived"
ORDER_VERBATIM = "verbatim"


class OmegaScheme(Enum):
    """How Ω_y is refreshed inside each PGGM scan."""

    GS = "GS"
    MH1 = "MH1"
    HR = "HR"
    MI = "MI"

    @classmethod
    def parse(cls, text: str) -> "OmegaScheme":
        try:
            return cls(text.strip().upper())
        except ValueError as exc:
            raise InvalidParamsError(f"unknown omega update {text!r}") from exc


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📦 Records
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class PggmData:
    """n×q responses Y and n×p covariates X."""

    y: FloatArray
    x: FloatArray

    def __post_init__(self) -> None:
        y = as_float_array(self.y, "y")
        x = as_float_array(self.x, "x")
        if y.ndim != 2 or x.ndim != 2 or y.shape[0] != x.shape[0]:
            raise DimMismatchError(
                "y and x must be matrices with the same row count",
                {"y": y.shape, "x": x.shape},
            )
        if y.shape[0] < 1:
            raise DimMismatchError("need at least one observation")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def q(self) -> int:
        return int(self.y.shape[1])

    @property
    def p(self) -> int:
        return int(self.x.shape[1])

    @cached_property
    def gram(self) -> FloatArray:
        return self.x.T @ self.x

    @cached_property
    def yty(self) -> FloatArray:
        return self.y.T @ self.y

    @cached_property
    def ytx(self) -> FloatArray:
        return self.y.T @ self.x


@dataclass(frozen=True)
class PggmHyper:
    u: float
    v: SpdMatrix
    alpha: float
    ell: FloatArray
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        v = require_spd(as_float_array(self.v, "v"), "v")
        if not self.u > v.shape[0] - 1:
            raise InvalidParamsError(
                "Wishart prior dof must exceed q - 1", {"u": self.u, "q": v.shape[0]}
            )
        ell = as_float_array(self.ell, "ell").reshape(-1)
        if np.any(ell <= 0) or self.alpha <= 0 or self.a <= 0 or self.b <= 0:
            raise InvalidParamsError("alpha, ell, a and b must be positive")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "ell", ell)

    @classmethod
    def default(cls, q: int, p: int) -> "PggmHyper":
        """α = (q+1)/2, ℓ_k = 1, u = q, V = I/q, a = b = 1."""
        return cls(
            u=float(q),
            v=np.eye(q) / q,
            alpha=(q + 1) / 2.0,
            ell=np.ones(p),
            a=1.0,
            b=1.0,
        )


@dataclass
class PggmState:
    omega_y: SpdMatrix
    delta: FloatArray
    lambda_k: FloatArray
    pi: float

    @property
    def n_zero(self) -> int:
        """N₀: columns of Δ that are exactly zero."""
        return int(np.sum(~np.any(self.delta != 0.0, axis=0)))

    def copy(self) -> "PggmState":
        return PggmState(
            self.omega_y.copy(), self.delta.copy(), self.lambda_k.copy(), self.pi
        )


def initial_pggm_state(data: PggmData) -> PggmState:
    return PggmState(
        omega_y=np.eye(data.q),
        delta=np.zeros((data.q, data.p)),
        lambda_k=np.ones(data.p),
        pi=0.5,
    )


def _check_shapes(state: PggmState, data: PggmData, hyper: PggmHyper) -> None:
    if (
        state.omega_y.shape != (data.q, data.q)
        or state.delta.shape != (data.q, data.p)
        or state.lambda_k.shape != (data.p,)
        or hyper.v.shape != (data.q, data.q)
        or hyper.ell.shape != (data.p,)
    ):
        raise DimMismatchError(
            "state, data and hyperparameters disagree in shape",
            {"q": data.q, "p": data.p},
        )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧮 Joint density and conditionals
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def pggm_log_joint(state: PggmState, data: PggmData, hyper: PggmHyper) -> float:
    """Log joint density of (Y, Δ, λ, π, Ω_y) given X, spike columns as point masses."""
    _check_shapes(state, data, hyper)
    omega = state.omega_y
    omega_inv = spd_inverse(omega)
    logdet = logdet_spd(omega)
    q, n = data.q, data.n

    mean = data.x @ state.delta.T @ omega_inv
    resid = data.y - mean
    lik = 0.5 * n * logdet - 0.5 * n * q * _LOG_2PI
    lik -= 0.5 * float(np.sum((resid @ omega) * resid))

    prior_delta = 0.0
    for k in range(data.p):
        column = state.delta[:, k]
        if np.any(column != 0.0):
            lam = state.lambda_k[k]
            prior_delta += math.log1p(-state.pi) - 0.5 * q * (_LOG_2PI + math.log(lam))
            prior_delta += -0.5 * logdet - 0.5 * float(column @ omega_inv @ column) / lam
        else:
            prior_delta += math.log(state.pi)

    prior_lambda = float(
        np.sum(
            hyper.alpha * np.log(hyper.ell)
            - gammaln(hyper.alpha)
            + (hyper.alpha - 1.0) * np.log(state.lambda_k)
            - hyper.ell * state.lambda_k
        )
    )
    prior_pi = (
        (hyper.a - 1.0) * math.log(state.pi)
        + (hyper.b - 1.0) * math.log1p(-state.pi)
        + gammaln(hyper.a + hyper.b)
        - gammaln(hyper.a)
        - gammaln(hyper.b)
    )
    prior_omega = wishart_log_density(omega, hyper.u, hyper.v)
    return lik + prior_delta + prior_lambda + float(prior_pi) + prior_omega


def pggm_omega_conditional(
    state: PggmState,
    data: PggmData,
    hyper: PggmHyper,
    order: str = ORDER_DERIVED,
) -> MgigConditional:
    """
    Full conditional of Ω_y.

    MGIG_q(λ, YᵀY + V⁻¹, Δ(XᵀX + diag(1/λ_k))Δᵀ) where the likelihood, the
    Wishart prior and the p - N₀ slab columns give
    λ = (n + N₀ + u - p - q - 1)/2. ``order="verbatim"`` uses
    (n + N₀ + u - 2p - 1)/2 instead, which coincides when p = q.

    Returns:
        The conditional, flagged degenerate when its Γ-parameter is singular
    """
    _check_shapes(state, data, hyper)
    n0 = state.n_zero
    if order == ORDER_DERIVED:
        lam = (data.n + n0 + hyper.u - data.p - data.q - 1) / 2.0
    elif order == ORDER_VERBATIM:
        lam = (data.n + n0 + hyper.u - 2 * data.p - 1) / 2.0
    else:
        raise InvalidParamsError(f"unknown order convention {order!r}")
    psi = symmetrize(data.yty + spd_inverse(hyper.v))
    weight = data.gram + np.diag(1.0 / state.lambda_k)
    gamma = symmetrize(state.delta @ weight @ state.delta.T)
    degenerate = not is_spd(gamma)
    return MgigConditional(
        lambda_=lam,
        psi=psi,
        gamma=gamma,
        degenerate=degenerate,
        rank=numerical_rank(gamma) if degenerate else data.q,
    )


def pggm_delta_column_terms(
    k: int, state: PggmState, data: PggmData
) -> Tuple[float, MvnPrecisionParams]:
    """
    Spike/slab log-odds and slab conditional for column Δ_k.

    With h = Yᵀx_k - Ω_y⁻¹ Σ_{j≠k} G_jk Δ_j and c = G_kk + 1/λ_k
    (G = XᵀX), the slab conditional is N(Ω_y h / c, Ω_y / c) and
    log[P(slab)/P(spike)] = log(1-π) - log π - (q/2)·log(1 + λ_k G_kk) + hᵀΩ_y h/(2c).
    """
    g = data.gram
    omega = state.omega_y
    omega_inv = spd_inverse(omega)
    others = state.delta @ g[:, k] - state.delta[:, k] * g[k, k]
    h = data.ytx[:, k] - omega_inv @ others
    lam = state.lambda_k[k]
    c = g[k, k] + 1.0 / lam
    log_odds = (
        math.log1p(-state.pi)
        - math.log(state.pi)
        - 0.5 * data.q * math.log1p(lam * g[k, k])
        + 0.5 * float(h @ omega @ h) / c
    )
    return log_odds, MvnPrecisionParams(h, c * omega_inv)


def pggm_lambda_conditional(k: int, state: PggmState, hyper: PggmHyper) -> GigParams:
    """GIG(α - q/2, 2ℓ_k, Δ_kᵀΩ_y⁻¹Δ_k) for a slab column, the Ga(α, ℓ_k) prior otherwise."""
    column = state.delta[:, k]
    if np.any(column != 0.0):
        quad = float(column @ spd_inverse(state.omega_y) @ column)
        q = state.delta.shape[0]
        return GigParams(hyper.alpha - q / 2.0, 2.0 * hyper.ell[k], quad)
    return GigParams(hyper.alpha, 2.0 * hyper.ell[k], 0.0)


def _regularize(cond: MgigConditional) -> MgigParams:
    eps = get_tolerances().regularize_rel * float(np.trace(cond.psi)) / cond.dim
    logger.warning(
        "Ω_y conditional has a singular Γ-parameter (rank %d); adding %.3g·I",
        cond.rank,
        eps,
    )
    return cond.regularized(eps)


def update_omega(
    cond: MgigConditional,
    omega: SpdMatrix,
    scheme: OmegaScheme,
    rng: RngStream,
    gs_scans: int = DEFAULT_OMEGA_GS_SCANS,
    inner_iters: int = DEFAULT_INNER_ITERS,
) -> SpdMatrix:
    """
    Refresh Ω_y from its conditional with the chosen scheme.

    A singular Γ-parameter is drawn exactly through the Matsumoto-Yor
    composition when λ > -1; MI and λ ≤ -1 fall back to Γ + εI.
    """
    if scheme is OmegaScheme.MI:
        params = _regularize(cond) if cond.degenerate else cond.to_params()
        return solve_riccati(params.lambda_, params.psi, params.gamma)
    if cond.degenerate:
        if cond.lambda_ > -1.0:
            return sample_singular_gamma(
                cond.lambda_, cond.psi, cond.gamma, rng, SamplerKind.gs(), inner_iters
            )
        params = _regularize(cond)
    else:
        params = cond.to_params()
    if scheme is OmegaScheme.GS:
        return advance(omega, params, SamplerKind.gs(), gs_scans, rng)
    kind = SamplerKind.mh1() if scheme is OmegaScheme.MH1 else SamplerKind.hr()
    return advance(omega, params, kind, 1, rng)


def pggm_gibbs_step(
    state: PggmState,
    data: PggmData,
    hyper: PggmHyper,
    omega_update: OmegaScheme,
    rng: RngStream,
    gs_scans: int = DEFAULT_OMEGA_GS_SCANS,
    order: str = ORDER_DERIVED,
) -> PggmState:
    """
    One PGGM scan: Δ_1..Δ_p, λ_1..λ_p, π, then Ω_y.

    Args:
        state: Current state (not modified)
        data: Observations
        hyper: Prior hyperparameters
        omega_update: Scheme used for Ω_y
        rng: Stream supplying the randomness
        gs_scans: Gibbs scans per Ω_y update under the GS scheme
        order: Order convention for the Ω_y conditional

    Returns:
        The new state
    """
    _check_shapes(state, data, hyper)
    new = state.copy()

    for k in range(data.p):
        log_odds, slab = pggm_delta_column_terms(k, new, data)
        if rng.uniform() < float(expit(log_odds)):
            new.delta[:, k] = sample_mvn_precision(slab, rng)
        else:
            new.delta[:, k] = 0.0

    for k in range(data.p):
        new.lambda_k[k] = sample_gig(pggm_lambda_conditional(k, new, hyper), rng)

    n0 = new.n_zero
    new.pi = rng.beta(hyper.a + n0, hyper.b + data.p - n0)

    cond = pggm_omega_conditional(new, data, hyper, order)
    new.omega_y = update_omega(cond, new.omega_y, omega_update, rng, gs_scans)
    return new


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧪 Simulation and chains
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class PggmTruth:
    omega_y: SpdMatrix
    delta: FloatArray


def simulate_pggm(
    q: int, p: int, n: int, rng: RngStream
) -> Tuple[PggmData, PggmTruth]:
    """
    Synthetic data set.

    X entries are U(0, 1/3); Ω_y = 2C⁻¹ with C_jk = 0.5^|j-k|; each Δ_k is
    N_q(0, Ω_y) or exactly zero with probability 1/2; Y_i ~ N_q(Ω_y⁻¹Δx_i, Ω_y⁻¹).
    """
    if q < 1 or p < 1 or n < 1:
        raise InvalidParamsError("q, p and n must be positive", {"q": q, "p": p, "n": n})
    gen = rng.generator
    x = gen.uniform(0.0, 1.0 / 3.0, size=(n, p))
    idx = np.arange(q)
    corr = 0.5 ** np.abs(idx[:, None] - idx[None, :])
    omega = symmetrize(2.0 * spd_inverse(corr))
    chol_omega = np.linalg.cholesky(omega)
    delta = np.zeros((q, p))
    for k in range(p):
        if gen.random() < 0.5:
            delta[:, k] = chol_omega @ gen.standard_normal(q)
    cov = spd_inverse(omega)
    chol_cov = np.linalg.cholesky(cov)
    mean = x @ delta.T @ cov
    y = mean + gen.standard_normal((n, q)) @ chol_cov.T
    return PggmData(y=y, x=x), PggmTruth(omega_y=omega, delta=delta)


@dataclass
class PggmRun:
    """Recorded output of one PGGM chain."""

    scheme: OmegaScheme
    traces: Dict[str, FloatArray]
    omega_mean: FloatArray
    delta_mean: FloatArray
    mse_path: List[Tuple[int, float, float]] = field(default_factory=list)
    ess_omega: float = float("nan")
    ess_delta: float = float("nan")
    wall_seconds: float = 0.0
    n_recorded: int = 0


TRACE_ENTRIES = {
    "omega_11": ("omega", 0, 0),
    "omega_12": ("omega", 0, 1),
    "delta_14": ("delta", 0, 3),
    "delta_24": ("delta", 1, 3),
}


def _matrix_mse(estimate: FloatArray, truth: FloatArray) -> float:
    return float(np.sum((estimate - truth) ** 2))


def _mean_ess(series: FloatArray) -> float:
    values = [ess_detail(series[:, j]).value for j in range(series.shape[1])]
    return float(np.mean(values)) if values else float("nan")


def run_pggm_chain(
    data: PggmData,
    hyper: PggmHyper,
    scheme: OmegaScheme,
    n_iter: int,
    burn_in: int,
    thin: int,
    rng: RngStream,
    truth: Optional[PggmTruth] = None,
    mse_every: int = 0,
    gs_scans: int = DEFAULT_OMEGA_GS_SCANS,
    order: str = ORDER_DERIVED,
    init: Optional[PggmState] = None,
) -> PggmRun:
    """
    Run a PGGM chain and summarize it.

    Records Ω_y and Δ after burn-in every ``thin`` scans, the trace entries
    (Ω_y)₁₁, (Ω_y)₁₂, Δ₁₄, Δ₂₄ that exist for the data's shape, posterior
    means, and, when ``truth`` and ``mse_every`` are given, the squared
    Frobenius error of the running posterior means every ``mse_every`` scans.
    """
    if not (n_iter > burn_in >= 0 and thin >= 1):
        raise InvalidParamsError(
            "need n_iter > burn_in >= 0 and thin >= 1",
            {"n_iter": n_iter, "burn_in": burn_in, "thin": thin},
        )
    state = init.copy() if init is not None else initial_pggm_state(data)
    keys = [
        key
        for key, (which, i, j) in TRACE_ENTRIES.items()
        if i < data.q and j < (data.q if which == "omega" else data.p)
    ]
    iu = np.triu_indices(data.q)
    omega_rows: List[FloatArray] = []
    delta_rows: List[FloatArray] = []
    trace_rows: Dict[str, List[float]] = {key: [] for key in keys}
    omega_sum = np.zeros((data.q, data.q))
    delta_sum = np.zeros((data.q, data.p))
    mse_path: List[Tuple[int, float, float]] = []

    began = time.perf_counter()
    for t in range(n_iter):
        if t == burn_in:
            began = time.perf_counter()
        state = pggm_gibbs_step(state, data, hyper, scheme, rng, gs_scans, order)
        if t >= burn_in and (t - burn_in) % thin == 0:
            omega_rows.append(state.omega_y[iu])
            delta_rows.append(state.delta.reshape(-1))
            omega_sum += state.omega_y
            delta_sum += state.delta
            for key in keys:
                which, i, j = TRACE_ENTRIES[key]
                source = state.omega_y if which == "omega" else state.delta
                trace_rows[key].append(float(source[i, j]))
        if truth is not None and mse_every > 0 and omega_rows and (t + 1) % mse_every == 0:
            count = len(omega_rows)
            mse_path.append(
                (
                    t + 1,
                    _matrix_mse(omega_sum / count, truth.omega_y),
                    _matrix_mse(delta_sum / count, truth.delta),
                )
            )
    elapsed = time.perf_counter() - began

    count = len(omega_rows)
    omega_stack = np.array(omega_rows)
    delta_stack = np.array(delta_rows)
    run = PggmRun(
        scheme=scheme,
        traces={key: np.array(values) for key, values in trace_rows.items()},
        omega_mean=omega_sum / count,
        delta_mean=delta_sum / count,
        mse_path=mse_path,
        wall_seconds=elapsed,
        n_recorded=count,
    )
    if count >= 10:
        run.ess_omega = _mean_ess(omega_stack)
        run.ess_delta = _mean_ess(delta_stack)
    logger.debug("PGGM %s chain: %d recorded in %.2fs", scheme.value, count, elapsed)
    return run
