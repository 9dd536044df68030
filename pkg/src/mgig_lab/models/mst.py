#!/usr/bin/env python3
"""
Matrix skew-t model as a Wishart mixture of matrix normals.

    Y_i | W_i ~ N_{p,q}(M + W_i B, W_i, Ω),   W_i ~ IW_p(Ψ, ν),   i = 1..n

with ν fixed, ψ₁₁ = 1 for identifiability and priors
M ~ N_{p,q}(A₀M, U₀M, V₀M), B ~ N_{p,q}(A₀B, U₀B, V₀B), Ψ ~ W_p(η₀, Ψ₀),
Ω ~ IW_q(Ω₀, ξ₀). Matrix-normal N_{p,q}(A, U, V) means vec(X) ~ N(vec A, V ⊗ U)
with column-major vec.

The latent W_i⁻¹ has full conditional MGIG_p((ν+q-p-1)/2, Γ̃_i, Φ̃) with
Γ̃_i = Ψ + (Y_i - M)Ω⁻¹(Y_i - M)ᵀ and Φ̃ = BΩ⁻¹Bᵀ. When B is rank deficient
(always when q < p) Φ̃ is singular and the draw goes through the
Matsumoto-Yor composition.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from mgig_lab.config import DEFAULT_INNER_ITERS
from mgig_lab.core.exceptions import (
    DimMismatchError,
    EmptyChainError,
    InvalidParamsError,
)
from mgig_lab.core.matrix_core import (
    is_spd,
    numerical_rank,
    require_spd,
    spd_inverse,
    symmetrize,
)
from mgig_lab.core.random_core import (
    RngStream,
    inverse_wishart_log_density,
    matrix_normal_log_density,
    sample_inverse_wishart,
    sample_matrix_normal,
    sample_mvn_precision,
    sample_wishart,
    wishart_log_density,
)
from mgig_lab.diagnostics.ess import ess_detail
from mgig_lab.samplers.chain import advance, sample_singular_gamma
from mgig_lab.utils.type_definitions import (
    FloatArray,
    MgigConditional,
    MvnPrecisionParams,
    SamplerKind,
    SamplerName,
    SpdMatrix,
    WishartParams,
    as_float_array,
)

logger = logging.getLogger(__name__)

PSI_CONDITIONAL = "conditional"
PSI_RESCALE = "rescale"

LOSS_REPLICATES = "replicates"
LOSS_RAO_BLACKWELL = "rao_blackwell"


def vec(x: FloatArray) -> FloatArray:
    return x.reshape(-1, order="F")


def unvec(v: FloatArray, p: int, q: int) -> FloatArray:
    return v.reshape((p, q), order="F")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📦 Records
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class MstData:
    """n observations stacked as an (n, p, q) array."""

    y: FloatArray

    def __post_init__(self) -> None:
        y = as_float_array(self.y, "y")
        if y.ndim != 3:
            raise DimMismatchError("y must have shape (n, p, q)", {"shape": y.shape})
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def p(self) -> int:
        return int(self.y.shape[1])

    @property
    def q(self) -> int:
        return int(self.y.shape[2])


@dataclass(frozen=True)
class MstHyper:
    nu: float
    a0m: FloatArray
    u0m: SpdMatrix
    v0m: SpdMatrix
    a0b: FloatArray
    u0b: SpdMatrix
    v0b: SpdMatrix
    psi0: SpdMatrix
    eta0: float
    omega0: SpdMatrix
    xi0: float

    def __post_init__(self) -> None:
        p, q = np.shape(self.a0m)
        for name in ("u0m", "u0b", "psi0"):
            matrix = require_spd(as_float_array(getattr(self, name), name), name)
            if matrix.shape != (p, p):
                raise DimMismatchError(f"{name} must be {p}×{p}")
            object.__setattr__(self, name, matrix)
        for name in ("v0m", "v0b", "omega0"):
            matrix = require_spd(as_float_array(getattr(self, name), name), name)
            if matrix.shape != (q, q):
                raise DimMismatchError(f"{name} must be {q}×{q}")
            object.__setattr__(self, name, matrix)
        if np.shape(self.a0b) != (p, q):
            raise DimMismatchError("a0b must match a0m")
        if not (self.nu > p - 1 and self.eta0 > p - 1 and self.xi0 > q - 1):
            raise InvalidParamsError(
                "need nu, eta0 > p - 1 and xi0 > q - 1",
                {"nu": self.nu, "eta0": self.eta0, "xi0": self.xi0},
            )
        object.__setattr__(self, "a0m", as_float_array(self.a0m, "a0m"))
        object.__setattr__(self, "a0b", as_float_array(self.a0b, "a0b"))

    @property
    def p(self) -> int:
        return int(self.a0m.shape[0])

    @property
    def q(self) -> int:
        return int(self.a0m.shape[1])

    @classmethod
    def default(cls, p: int, q: int, nu: float) -> "MstHyper":
        """
        Vague matrix-normal priors (scale 100) at zero.

        Ψ₀ = I, η₀ = p + 1, Ω₀ = I and ξ₀ = q + 2.
        """
        return cls(
            nu=float(nu),
            a0m=np.zeros((p, q)),
            u0m=100.0 * np.eye(p),
            v0m=np.eye(q),
            a0b=np.zeros((p, q)),
            u0b=100.0 * np.eye(p),
            v0b=np.eye(q),
            psi0=np.eye(p),
            eta0=float(p + 1),
            omega0=np.eye(q),
            xi0=float(q + 2),
        )


@dataclass
class MstState:
    m: FloatArray
    b: FloatArray
    psi: SpdMatrix
    omega: SpdMatrix
    w: List[SpdMatrix]

    def copy(self) -> "MstState":
        return MstState(
            self.m.copy(),
            self.b.copy(),
            self.psi.copy(),
            self.omega.copy(),
            [w.copy() for w in self.w],
        )


def initial_mst_state(data: MstData) -> MstState:
    """M at the sample mean, B = 0, Ψ = I, Ω = I and every W_i = I."""
    p, q = data.p, data.q
    m = data.y.mean(axis=0) if data.n else np.zeros((p, q))
    return MstState(
        m=m,
        b=np.zeros((p, q)),
        psi=np.eye(p),
        omega=np.eye(q),
        w=[np.eye(p) for _ in range(data.n)],
    )


def _check_shapes(state: MstState, data: MstData, hyper: MstHyper) -> None:
    p, q = hyper.p, hyper.q
    if (
        (data.n and (data.p, data.q) != (p, q))
        or state.m.shape != (p, q)
        or state.b.shape != (p, q)
        or state.psi.shape != (p, p)
        or state.omega.shape != (q, q)
        or len(state.w) != data.n
    ):
        raise DimMismatchError(
            "state, data and hyperparameters disagree in shape",
            {"p": p, "q": q, "n": data.n},
        )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧮 Joint density and full conditionals
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def mst_log_joint(state: MstState, data: MstData, hyper: MstHyper) -> float:
    """Log joint density of (Y, W, M, B, Ψ, Ω) on the full Ψ space."""
    _check_shapes(state, data, hyper)
    total = 0.0
    for y_i, w_i in zip(data.y, state.w):
        total += matrix_normal_log_density(y_i, state.m + w_i @ state.b, w_i, state.omega)
        total += inverse_wishart_log_density(w_i, hyper.nu, state.psi)
    total += matrix_normal_log_density(state.m, hyper.a0m, hyper.u0m, hyper.v0m)
    total += matrix_normal_log_density(state.b, hyper.a0b, hyper.u0b, hyper.v0b)
    total += wishart_log_density(state.psi, hyper.eta0, hyper.psi0)
    total += inverse_wishart_log_density(state.omega, hyper.xi0, hyper.omega0)
    return total


def w_inverse_conditional(
    i: int, state: MstState, data: MstData, hyper: MstHyper
) -> MgigConditional:
    """
    W_i⁻¹ ~ MGIG_p((ν+q-p-1)/2, Ψ + E_iΩ⁻¹E_iᵀ, BΩ⁻¹Bᵀ), E_i = Y_i - M.

    The W_i kernel |W|^(-(ν+p+q+1)/2) etr(-(Γ̃W⁻¹ + Φ̃W)/2) maps to this
    order through the inversion property.
    """
    p, q = hyper.p, hyper.q
    omega_inv = spd_inverse(state.omega)
    resid = data.y[i] - state.m
    gamma_tilde = symmetrize(state.psi + resid @ omega_inv @ resid.T)
    phi_tilde = symmetrize(state.b @ omega_inv @ state.b.T)
    degenerate = not is_spd(phi_tilde)
    return MgigConditional(
        lambda_=(hyper.nu + q - p - 1) / 2.0,
        psi=gamma_tilde,
        gamma=phi_tilde,
        degenerate=degenerate,
        rank=numerical_rank(phi_tilde) if degenerate else p,
    )


def m_conditional(state: MstState, data: MstData, hyper: MstHyper) -> MvnPrecisionParams:
    """
    vec(M) ~ N(D d, D) with D⁻¹ = Ω⁻¹ ⊗ ΣW_i⁻¹ + V₀M⁻¹ ⊗ U₀M⁻¹ and
    d = vec(Σ W_i⁻¹(Y_i - W_iB)Ω⁻¹) + vec(U₀M⁻¹A₀M V₀M⁻¹).
    """
    omega_inv = spd_inverse(state.omega)
    u0_inv = spd_inverse(hyper.u0m)
    v0_inv = spd_inverse(hyper.v0m)
    w_inv_sum = np.zeros((hyper.p, hyper.p))
    linear = u0_inv @ hyper.a0m @ v0_inv
    for y_i, w_i in zip(data.y, state.w):
        w_inv = spd_inverse(w_i)
        w_inv_sum += w_inv
        linear = linear + w_inv @ (y_i - w_i @ state.b) @ omega_inv
    precision = np.kron(omega_inv, w_inv_sum) + np.kron(v0_inv, u0_inv)
    return MvnPrecisionParams(vec(linear), symmetrize(precision))


def b_conditional(state: MstState, data: MstData, hyper: MstHyper) -> MvnPrecisionParams:
    """
    vec(B) ~ N(D d, D) with D⁻¹ = Ω⁻¹ ⊗ ΣW_i + V₀B⁻¹ ⊗ U₀B⁻¹ and
    d = vec(Σ (Y_i - M)Ω⁻¹) + vec(U₀B⁻¹A₀B V₀B⁻¹).
    """
    omega_inv = spd_inverse(state.omega)
    u0_inv = spd_inverse(hyper.u0b)
    v0_inv = spd_inverse(hyper.v0b)
    w_sum = np.zeros((hyper.p, hyper.p))
    linear = u0_inv @ hyper.a0b @ v0_inv
    for y_i, w_i in zip(data.y, state.w):
        w_sum += w_i
        linear = linear + (y_i - state.m) @ omega_inv
    precision = np.kron(omega_inv, w_sum) + np.kron(v0_inv, u0_inv)
    return MvnPrecisionParams(vec(linear), symmetrize(precision))


def psi_conditional(state: MstState, data: MstData, hyper: MstHyper) -> WishartParams:
    """Ψ ~ W_p(η₀ + nν, (ΣW_i⁻¹ + Ψ₀⁻¹)⁻¹) before the ψ₁₁ = 1 constraint."""
    precision = spd_inverse(hyper.psi0)
    for w_i in state.w:
        precision = precision + spd_inverse(w_i)
    return WishartParams(hyper.eta0 + data.n * hyper.nu, spd_inverse(symmetrize(precision)))


def omega_conditional(state: MstState, data: MstData, hyper: MstHyper) -> WishartParams:
    """Ω ~ IW_q(Ω₀ + ΣR_iᵀW_i⁻¹R_i, ξ₀ + np), R_i = Y_i - M - W_iB; dof and scale of the IW law."""
    scale = hyper.omega0.copy()
    for y_i, w_i in zip(data.y, state.w):
        resid = y_i - state.m - w_i @ state.b
        scale = scale + resid.T @ spd_inverse(w_i) @ resid
    return WishartParams(hyper.xi0 + data.n * hyper.p, symmetrize(scale))


@dataclass(frozen=True)
class MstConditionals:
    w_inverse: Tuple[MgigConditional, ...]
    m: MvnPrecisionParams
    b: MvnPrecisionParams
    psi: WishartParams
    omega: WishartParams


def mst_conditionals(state: MstState, data: MstData, hyper: MstHyper) -> MstConditionals:
    """Every full conditional evaluated at one state."""
    _check_shapes(state, data, hyper)
    return MstConditionals(
        w_inverse=tuple(
            w_inverse_conditional(i, state, data, hyper) for i in range(data.n)
        ),
        m=m_conditional(state, data, hyper),
        b=b_conditional(state, data, hyper),
        psi=psi_conditional(state, data, hyper),
        omega=omega_conditional(state, data, hyper),
    )


def sample_psi_unit_corner(params: WishartParams, rng: RngStream) -> SpdMatrix:
    """
    Draw S ~ W_p(η, Σ) conditioned on S₁₁ = 1.

    Given S₁₁ = 1: S₂₁ ~ N(Σ₂₁/Σ₁₁, Σ₂₂·₁), S₂₂ = S₂₂·₁ + S₂₁S₂₁ᵀ with
    S₂₂·₁ ~ W_{p-1}(η - 1, Σ₂₂·₁) independent.
    """
    sigma = params.scale
    p = params.dim
    if p == 1:
        return np.ones((1, 1))
    s11 = sigma[0, 0]
    s21 = sigma[1:, 0]
    schur = symmetrize(sigma[1:, 1:] - np.outer(s21, s21) / s11)
    chol = scipy.linalg.cholesky(schur, lower=True)
    off = s21 / s11 + chol @ rng.standard_normal(p - 1)
    block = sample_wishart(WishartParams(params.dof - 1.0, schur), rng)
    out = np.empty((p, p))
    out[0, 0] = 1.0
    out[1:, 0] = off
    out[0, 1:] = off
    out[1:, 1:] = block + np.outer(off, off)
    return symmetrize(out)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔁 Gibbs scan
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _w_kind(w_update: SamplerKind) -> SamplerKind:
    if w_update.name not in (SamplerName.GS, SamplerName.MH1, SamplerName.HR):
        raise InvalidParamsError(f"W update must be GS, MH1 or HR, not {w_update.label}")
    return w_update


def mst_gibbs_step(
    state: MstState,
    data: MstData,
    hyper: MstHyper,
    w_update: SamplerKind,
    rng: RngStream,
    psi_constraint: str = PSI_CONDITIONAL,
    fit_skewness: bool = True,
    inner_iters: int = DEFAULT_INNER_ITERS,
) -> MstState:
    """
    One scan: W_1..W_n, M, B, Ψ, Ω.

    Each W_i⁻¹ takes one step of ``w_update`` on its MGIG conditional, or an
    exact Matsumoto-Yor draw when Φ̃ is singular. ``psi_constraint`` selects
    how ψ₁₁ = 1 is kept: ``"conditional"`` draws Ψ from its conditional
    given ψ₁₁ = 1; ``"rescale"`` draws Ψ freely and maps
    (Ψ, W, B, Ω) → (Ψ/c, W/c, cB, cΩ) with c = ψ₁₁, which leaves the
    likelihood unchanged. ``fit_skewness=False`` keeps B ≡ 0 (matrix-t).
    """
    _check_shapes(state, data, hyper)
    kind = _w_kind(w_update)
    new = state.copy()

    for i in range(data.n):
        cond = w_inverse_conditional(i, new, data, hyper)
        if cond.degenerate:
            w_inv = sample_singular_gamma(
                cond.lambda_, cond.psi, cond.gamma, rng, SamplerKind.gs(), inner_iters
            )
        else:
            w_inv = advance(spd_inverse(new.w[i]), cond.to_params(), kind, 1, rng)
        new.w[i] = spd_inverse(w_inv)

    new.m = unvec(sample_mvn_precision(m_conditional(new, data, hyper), rng), hyper.p, hyper.q)
    if fit_skewness:
        new.b = unvec(
            sample_mvn_precision(b_conditional(new, data, hyper), rng), hyper.p, hyper.q
        )
    else:
        new.b = np.zeros((hyper.p, hyper.q))

    psi_params = psi_conditional(new, data, hyper)
    if psi_constraint == PSI_CONDITIONAL:
        new.psi = sample_psi_unit_corner(psi_params, rng)
    elif psi_constraint == PSI_RESCALE:
        drawn = sample_wishart(psi_params, rng)
        c = float(drawn[0, 0])
        new.psi = drawn / c
        new.w = [w / c for w in new.w]
        new.b = new.b * c
        new.omega = new.omega * c
    else:
        raise InvalidParamsError(f"unknown psi constraint {psi_constraint!r}")

    omega_params = omega_conditional(new, data, hyper)
    new.omega = sample_inverse_wishart(omega_params.dof, omega_params.scale, rng)
    return new


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧪 Simulation, chains and predictive loss
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class MstSimulation:
    data: MstData
    w: Tuple[SpdMatrix, ...]


def simulate_mst(
    m: FloatArray,
    b: FloatArray,
    psi: SpdMatrix,
    omega: SpdMatrix,
    nu: float,
    n: int,
    rng: RngStream,
    w: Optional[Sequence[SpdMatrix]] = None,
) -> MstSimulation:
    """
    Forward simulation: W_i ~ IW_p(Ψ, ν), Y_i ~ N_{p,q}(M + W_iB, W_i, Ω).

    Args:
        w: Optional fixed latent matrices, one per observation

    Raises:
        InvalidDofError: If ν ≤ p - 1
    """
    m = as_float_array(m, "m")
    b = as_float_array(b, "b")
    p, q = m.shape
    psi = require_spd(as_float_array(psi, "psi"), "psi")
    omega = require_spd(as_float_array(omega, "omega"), "omega")
    WishartParams(nu, psi)
    if n < 0:
        raise InvalidParamsError("n must be nonnegative")
    if w is not None and len(w) != n:
        raise DimMismatchError("need one latent matrix per observation")
    latent: List[SpdMatrix] = []
    ys: List[FloatArray] = []
    for i in range(n):
        w_i = sample_inverse_wishart(nu, psi, rng) if w is None else np.asarray(w[i])
        latent.append(w_i)
        ys.append(sample_matrix_normal(m + w_i @ b, w_i, omega, rng))
    y = np.stack(ys) if ys else np.zeros((0, p, q))
    return MstSimulation(data=MstData(y), w=tuple(latent))


@dataclass
class MstRun:
    states: List[MstState]
    wall_seconds: float = 0.0
    ess: Dict[str, float] = field(default_factory=dict)


def _block_ess(stack: FloatArray) -> float:
    flat = stack.reshape(stack.shape[0], -1)
    values = [
        e.value for e in (ess_detail(flat[:, j]) for j in range(flat.shape[1]))
        if not e.degenerate
    ]
    return float(np.mean(values)) if values else float("nan")


def run_mst_chain(
    data: MstData,
    hyper: MstHyper,
    w_update: SamplerKind,
    n_iter: int,
    burn_in: int,
    thin: int,
    rng: RngStream,
    init: Optional[MstState] = None,
    fit_skewness: bool = True,
    psi_constraint: str = PSI_CONDITIONAL,
) -> MstRun:
    """Run ``n_iter`` scans and keep every ``thin``-th state after burn-in."""
    if not (n_iter > burn_in >= 0 and thin >= 1):
        raise InvalidParamsError(
            "need n_iter > burn_in >= 0 and thin >= 1",
            {"n_iter": n_iter, "burn_in": burn_in, "thin": thin},
        )
    state = init.copy() if init is not None else initial_mst_state(data)
    kept: List[MstState] = []
    began = time.perf_counter()
    for t in range(n_iter):
        if t == burn_in:
            began = time.perf_counter()
        state = mst_gibbs_step(
            state, data, hyper, w_update, rng, psi_constraint, fit_skewness
        )
        if t >= burn_in and (t - burn_in) % thin == 0:
            kept.append(state)
    elapsed = time.perf_counter() - began

    run = MstRun(states=kept, wall_seconds=elapsed)
    if len(kept) >= 10:
        iu_q = np.triu_indices(hyper.q)
        run.ess = {
            "m": _block_ess(np.stack([s.m for s in kept])),
            "b": _block_ess(np.stack([s.b for s in kept])) if fit_skewness else float("nan"),
            "omega": _block_ess(np.stack([s.omega[iu_q] for s in kept])),
        }
    logger.debug("MST %s chain: %d kept in %.2fs", w_update.label, len(kept), elapsed)
    return run


def predictive_loss(
    states: Sequence[MstState],
    data: MstData,
    rng: RngStream,
    method: str = LOSS_REPLICATES,
) -> float:
    """
    Gelfand-Ghosh posterior predictive loss G + P with squared error on vec(Y).

    G = Σ_i ‖Y_i - Ŷ_i‖² and P = Σ_i tr Var(Y_i^rep), where the replicate
    Y_i^rep ~ N_{p,q}(M + W_iB, W_i, Ω) is drawn under each retained state.
    ``method="rao_blackwell"`` replaces the replicates by their exact
    conditional means and variances (entry (j, k) has variance (W_i)_jj Ω_kk).

    Raises:
        EmptyChainError: If ``states`` is empty
    """
    if not states:
        raise EmptyChainError("predictive loss needs at least one posterior state")
    n = data.n
    if n == 0:
        return 0.0
    if method == LOSS_REPLICATES:
        reps = np.stack(
            [
                np.stack(
                    [
                        sample_matrix_normal(s.m + s.w[i] @ s.b, s.w[i], s.omega, rng)
                        for i in range(n)
                    ]
                )
                for s in states
            ]
        )
        fitted = reps.mean(axis=0)
        penalty = float(np.sum(reps.var(axis=0)))
    elif method == LOSS_RAO_BLACKWELL:
        means = np.stack(
            [np.stack([s.m + s.w[i] @ s.b for i in range(n)]) for s in states]
        )
        within = np.mean(
            [
                sum(float(np.trace(s.w[i])) * float(np.trace(s.omega)) for i in range(n))
                for s in states
            ]
        )
        fitted = means.mean(axis=0)
        penalty = float(within) + float(np.sum(means.var(axis=0)))
    else:
        raise InvalidParamsError(f"unknown predictive loss method {method!r}")
    goodness = float(np.sum((data.y - fitted) ** 2))
    return goodness + penalty

