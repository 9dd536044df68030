#!/usr/bin/env python3
"""
Seeded random-variate generation.

``RngStream`` wraps a numpy PCG64 generator keyed by (seed, stream_id, path)
through ``SeedSequence`` so chains, replicates and worker threads each own a
reproducible, statistically independent stream.

GIG variates use SciPy's ``geninvgauss`` (ratio-of-uniforms with mode shift,
plus the dedicated algorithm for 0 < ν < 1 with small √(ab)) and dispatch to
Gamma / inverse-Gamma draws at the a = 0 and b = 0 boundaries. Wishart variates
use the Bartlett construction.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.stats
from scipy.linalg import LinAlgError
from scipy.special import multigammaln

from mgig_lab.core.exceptions import (
    DimMismatchError,
    InvalidParamsError,
    NotSpdError,
)
from mgig_lab.core.matrix_core import logdet_spd, spd_inverse, symmetrize
from mgig_lab.utils.type_definitions import (
    FloatArray,
    GigParams,
    MvnPrecisionParams,
    SpdMatrix,
    WishartParams,
)

logger = logging.getLogger(__name__)

_U64 = 2**64
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class RngStream:
    """
    A reproducible random stream.

    Identical (seed, stream_id, path) triples yield identical sequences.
    A stream is owned by one chain at a time; use :meth:`sibling` or
    :meth:`child` to hand independent streams to other workers.
    """

    seed: int
    stream_id: int = 0
    path: Tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not 0 <= int(value) < _U64:
                raise InvalidParamsError(f"{name} must be a 64-bit unsigned integer")
        self.seed = int(self.seed)
        self.stream_id = int(self.stream_id)
        self.path = tuple(int(k) for k in self.path)
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *self.path)
        )
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def sibling(self, stream_id: int) -> "RngStream":
        """A fresh stream with the same seed and another stream id."""
        return RngStream(self.seed, stream_id)

    def child(self, key: int) -> "RngStream":
        """A fresh stream nested under this one."""
        return RngStream(self.seed, self.stream_id, (*self.path, key))

    # Thin wrappers so kernels never reach into the generator directly.
    def standard_normal(self, size: Optional[object] = None) -> FloatArray:
        return self.generator.standard_normal(size)  # type: ignore[arg-type]

    def uniform(self) -> float:
        return float(self.generator.random())

    def chisquare(self, df: float) -> float:
        return float(self.generator.chisquare(df))

    def gamma(self, shape: float, scale: float) -> float:
        return float(self.generator.gamma(shape, scale))

    def beta(self, a: float, b: float) -> float:
        return float(self.generator.beta(a, b))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📈 GIG
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def sample_gig(params: GigParams, rng: RngStream) -> float:
    """
    Draw X ~ GIG(ν, a, b), density ∝ x^(ν-1) exp(-(a·x + b/x)/2).

    For a, b > 0 the two-parameter SciPy form GIG(ν, ω, ω) with ω = √(ab) is
    rescaled by √(b/a). At b = 0 the law is Gamma(ν, rate a/2); at a = 0 it is
    the reciprocal of Gamma(-ν, rate b/2).

    Args:
        params: GIG parameters (validated on construction)
        rng: Stream supplying the randomness

    Returns:
        A positive draw
    """
    nu, a, b = params.nu, params.a, params.b
    if b == 0.0:
        return rng.gamma(nu, 2.0 / a)
    if a == 0.0:
        return 1.0 / rng.gamma(-nu, 2.0 / b)
    omega = math.sqrt(a * b)
    z = scipy.stats.geninvgauss.rvs(nu, omega, random_state=rng.generator)
    return float(z) * math.sqrt(b / a)


def gig_log_density(x: float, params: GigParams) -> float:
    """Unnormalized log-density (ν-1)·log x - (a·x + b/x)/2."""
    if x <= 0:
        return -math.inf
    return (params.nu - 1.0) * math.log(x) - 0.5 * (params.a * x + params.b / x)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔔 Gaussian in precision form
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _precision_cholesky(precision: FloatArray) -> FloatArray:
    try:
        return scipy.linalg.cholesky(symmetrize(precision), lower=True)
    except LinAlgError as exc:
        raise NotSpdError("precision matrix is not positive definite") from exc


def sample_mvn_precision(params: MvnPrecisionParams, rng: RngStream) -> FloatArray:
    """
    Draw x ~ N(N⁻¹n, N⁻¹) using one Cholesky factor N = LLᵀ.

    The mean solves LLᵀμ = n and the noise is L⁻ᵀz with z standard normal.
    """
    lower = _precision_cholesky(params.precision)
    mean = scipy.linalg.cho_solve((lower, True), params.precision_times_mean)
    z = rng.standard_normal(params.dim)
    noise = scipy.linalg.solve_triangular(lower, z, lower=True, trans="T")
    return mean + noise


def mvn_precision_log_density(x: FloatArray, params: MvnPrecisionParams) -> float:
    lower = _precision_cholesky(params.precision)
    mean = scipy.linalg.cho_solve((lower, True), params.precision_times_mean)
    diff = np.asarray(x, dtype=np.float64).reshape(-1) - mean
    if diff.shape[0] != params.dim:
        raise DimMismatchError("x has the wrong length")
    quad = float(diff @ params.precision @ diff)
    half_logdet = float(np.sum(np.log(np.diag(lower))))
    return -0.5 * params.dim * _LOG_2PI + half_logdet - 0.5 * quad


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧊 Wishart family
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def sample_wishart(params: WishartParams, rng: RngStream) -> SpdMatrix:
    """
    Bartlett draw from W_p(ν, P).

    With P = LLᵀ and lower-triangular T having T_ii = √χ²(ν - i) and
    standard-normal entries below the diagonal, (LT)(LT)ᵀ ~ W_p(ν, P).
    """
    p = params.dim
    try:
        lower = scipy.linalg.cholesky(symmetrize(params.scale), lower=True)
    except LinAlgError as exc:
        raise NotSpdError("Wishart scale is not positive definite") from exc
    bartlett = np.zeros((p, p))
    for i in range(p):
        bartlett[i, i] = math.sqrt(rng.chisquare(params.dof - i))
        if i > 0:
            bartlett[i, :i] = rng.standard_normal(i)
    factor = lower @ bartlett
    return symmetrize(factor @ factor.T)


def sample_inverse_wishart(dof: float, scale: SpdMatrix, rng: RngStream) -> SpdMatrix:
    """IW_p(Ψ, ν): the inverse of a W_p(ν, Ψ⁻¹) draw; E = Ψ/(ν - p - 1)."""
    return spd_inverse(sample_wishart(WishartParams(dof, spd_inverse(scale)), rng))


def wishart_log_density(s: SpdMatrix, dof: float, scale: SpdMatrix) -> float:
    """Normalized W_p(ν, P) log-density at S."""
    p = scale.shape[0]
    if s.shape != scale.shape:
        raise DimMismatchError("S and P must share a shape")
    trace_term = float(np.trace(spd_inverse(scale) @ s))
    return (
        0.5 * (dof - p - 1) * logdet_spd(s)
        - 0.5 * trace_term
        - 0.5 * dof * p * math.log(2.0)
        - 0.5 * dof * logdet_spd(scale)
        - float(multigammaln(0.5 * dof, p))
    )


def inverse_wishart_log_density(w: SpdMatrix, dof: float, scale: SpdMatrix) -> float:
    """Normalized IW_p(Ψ, ν) log-density: |W|^(-(ν+p+1)/2) etr(-ΨW⁻¹/2)."""
    p = scale.shape[0]
    if w.shape != scale.shape:
        raise DimMismatchError("W and Ψ must share a shape")
    trace_term = float(np.trace(scale @ spd_inverse(w)))
    return (
        0.5 * dof * logdet_spd(scale)
        - 0.5 * (dof + p + 1) * logdet_spd(w)
        - 0.5 * trace_term
        - 0.5 * dof * p * math.log(2.0)
        - float(multigammaln(0.5 * dof, p))
    )


def matrix_normal_log_density(
    x: FloatArray, mean: FloatArray, row_cov: SpdMatrix, col_cov: SpdMatrix
) -> float:
    """log N_{p,q}(X | M, U, V): vec(X) ~ N(vec(M), V ⊗ U)."""
    p, q = x.shape
    diff = x - mean
    u_inv = spd_inverse(row_cov)
    v_inv = spd_inverse(col_cov)
    quad = float(np.trace(v_inv @ diff.T @ u_inv @ diff))
    return (
        -0.5 * p * q * _LOG_2PI
        - 0.5 * q * logdet_spd(row_cov)
        - 0.5 * p * logdet_spd(col_cov)
        - 0.5 * quad
    )


def sample_matrix_normal(
    mean: FloatArray, row_cov: SpdMatrix, col_cov: SpdMatrix, rng: RngStream
) -> FloatArray:
    """X = M + L_U Z L_Vᵀ with Z standard normal."""
    lu = scipy.linalg.cholesky(symmetrize(row_cov), lower=True)
    lv = scipy.linalg.cholesky(symmetrize(col_cov), lower=True)
    z = rng.standard_normal(mean.shape)
    return mean + lu @ z @ lv.T
