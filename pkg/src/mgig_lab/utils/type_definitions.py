"""
Shared value types for MGIG Lab.

Parameter records validate themselves on construction so that kernels can
assume their invariants. Arrays are stored as float64 copies; records are
frozen so a parameter set can be shared between chains without copying.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, TypedDict

import numpy as np
from numpy.typing import NDArray

from mgig_lab.core.exceptions import (
    DimMismatchError,
    InvalidDofError,
    InvalidParamsError,
    NotSpdError,
)

# Type aliases
FloatArray = NDArray[np.float64]
SymMatrix = FloatArray  # symmetric within Tolerances.tol_sym
SpdMatrix = FloatArray  # symmetric positive definite


def as_float_array(value: Any, name: str = "array") -> FloatArray:
    arr = np.array(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidParamsError(f"{name} has non-finite entries")
    return arr


def as_square(value: Any, name: str) -> FloatArray:
    arr = as_float_array(value, name)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimMismatchError(
            f"{name} must be a square matrix", {"shape": tuple(arr.shape)}
        )
    return arr


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧮 Linear algebra records
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class CholeskyFactors:
    """
    Unit-diagonal Cholesky parameterization Σ = B A Bᵀ.

    ``a`` holds the diagonal of A. ``b`` packs the strictly-lower entries of
    B column by column: column 1 rows 2..p, then column 2 rows 3..p, and so on.
    """

    a: FloatArray
    b: FloatArray

    def __post_init__(self) -> None:
        a = as_float_array(self.a, "a").reshape(-1)
        b = as_float_array(self.b, "b").reshape(-1)
        p = a.shape[0]
        if p < 1:
            raise DimMismatchError("a must have at least one entry")
        if b.shape[0] != p * (p - 1) // 2:
            raise DimMismatchError(
                "packed b has the wrong length",
                {"p": p, "expected": p * (p - 1) // 2, "got": b.shape[0]},
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return int(self.a.shape[0])


@dataclass(frozen=True)
class EigenSym:
    """Eigenpairs of a symmetric matrix, values in descending order."""

    values: FloatArray
    vectors: FloatArray


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎲 Univariate and Gaussian / Wishart parameter records
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class GigParams:
    """GIG(ν, a, b) with density ∝ x^(ν-1) exp(-(a·x + b/x)/2)."""

    nu: float
    a: float
    b: float

    def __post_init__(self) -> None:
        nu, a, b = float(self.nu), float(self.a), float(self.b)
        if not all(math.isfinite(v) for v in (nu, a, b)):
            raise InvalidParamsError("GIG parameters must be finite", self._asdict())
        if a < 0 or b < 0:
            raise InvalidParamsError("GIG rates must be nonnegative", self._asdict())
        if a == 0 and b == 0:
            raise InvalidParamsError("GIG needs a > 0 or b > 0", self._asdict())
        if b == 0 and nu <= 0:
            raise InvalidParamsError("Gamma limit (b=0) needs ν > 0", self._asdict())
        if a == 0 and nu >= 0:
            raise InvalidParamsError(
                "inverse-Gamma limit (a=0) needs ν < 0", self._asdict()
            )
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def _asdict(self) -> Dict[str, float]:
        return {"nu": self.nu, "a": self.a, "b": self.b}

    def reciprocal(self) -> "GigParams":
        """Parameters of 1/X when X ~ GIG(ν, a, b)."""
        return GigParams(-self.nu, self.b, self.a)


@dataclass(frozen=True)
class MvnPrecisionParams:
    """N(N⁻¹n, N⁻¹) given the precision N and the precision-times-mean n."""

    precision_times_mean: FloatArray
    precision: SpdMatrix

    def __post_init__(self) -> None:
        n = as_float_array(self.precision_times_mean, "n").reshape(-1)
        big_n = as_square(self.precision, "precision")
        if big_n.shape[0] != n.shape[0]:
            raise DimMismatchError(
                "precision and linear term disagree",
                {"precision": big_n.shape, "n": n.shape},
            )
        object.__setattr__(self, "precision_times_mean", n)
        object.__setattr__(self, "precision", big_n)

    @property
    def dim(self) -> int:
        return int(self.precision_times_mean.shape[0])


@dataclass(frozen=True)
class WishartParams:
    """W_p(ν, P): density ∝ |S|^((ν-p-1)/2) etr(-P⁻¹S/2), mean ν·P."""

    dof: float
    scale: SpdMatrix

    def __post_init__(self) -> None:
        scale = as_square(self.scale, "scale")
        dof = float(self.dof)
        p = scale.shape[0]
        if not dof > p - 1:
            raise InvalidDofError(
                "Wishart dof must exceed dim - 1", {"dof": dof, "dim": p}
            )
        object.__setattr__(self, "dof", dof)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return int(self.scale.shape[0])


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧊 MGIG parameter records
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class MgigParams:
    """MGIG_p(λ, Ψ, Γ): density ∝ |Σ|^λ etr(-(ΨΣ + ΓΣ⁻¹)/2)."""

    lambda_: float
    psi: SpdMatrix
    gamma: SpdMatrix

    def __post_init__(self) -> None:
        from mgig_lab.core.matrix_core import require_spd

        psi = require_spd(as_square(self.psi, "psi"), "psi")
        gamma = require_spd(as_square(self.gamma, "gamma"), "gamma")
        if psi.shape != gamma.shape:
            raise DimMismatchError(
                "psi and gamma must share a dimension",
                {"psi": psi.shape, "gamma": gamma.shape},
            )
        lam = float(self.lambda_)
        if not math.isfinite(lam):
            raise InvalidParamsError("lambda must be finite", {"lambda": lam})
        object.__setattr__(self, "lambda_", lam)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "gamma", gamma)

    @property
    def dim(self) -> int:
        return int(self.psi.shape[0])

    def cache_key(self) -> Tuple[float, bytes, bytes]:
        return (self.lambda_, self.psi.tobytes(), self.gamma.tobytes())


@dataclass(frozen=True)
class DegenerateMgigParams:
    """MGIG_p(λ, Ψ, ΘΘᵀ) with Θ a p×q full-column-rank factor, q < p."""

    lambda_: float
    psi: SpdMatrix
    theta: FloatArray

    def __post_init__(self) -> None:
        from mgig_lab.core.matrix_core import require_full_column_rank, require_spd

        psi = require_spd(as_square(self.psi, "psi"), "psi")
        theta = as_float_array(self.theta, "theta")
        if theta.ndim == 1:
            theta = theta.reshape(-1, 1)
        if theta.ndim != 2 or theta.shape[0] != psi.shape[0]:
            raise DimMismatchError(
                "theta must be p×q with p = dim(psi)",
                {"theta": theta.shape, "psi": psi.shape},
            )
        if theta.shape[1] >= theta.shape[0]:
            raise DimMismatchError(
                "theta must have fewer columns than rows", {"theta": theta.shape}
            )
        require_full_column_rank(theta)
        lam = float(self.lambda_)
        if not lam > -1.0:
            raise InvalidParamsError(
                "Matsumoto-Yor composition needs λ > -1", {"lambda": lam}
            )
        object.__setattr__(self, "lambda_", lam)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return int(self.psi.shape[0])

    @property
    def rank(self) -> int:
        return int(self.theta.shape[1])

    @property
    def gamma(self) -> FloatArray:
        return self.theta @ self.theta.T


@dataclass(frozen=True)
class MgigConditional:
    """
    MGIG full conditional whose Γ-parameter may be only positive semidefinite.

    Model conditionals (PGGM precision, skew-t mixing matrices) can produce a
    singular Γ. ``degenerate`` is True exactly when Γ is not SPD; samplers then
    compose a Matsumoto-Yor draw or regularize.
    """

    lambda_: float
    psi: SpdMatrix
    gamma: FloatArray
    degenerate: bool
    rank: int

    @property
    def dim(self) -> int:
        return int(self.psi.shape[0])

    def to_params(self) -> MgigParams:
        if self.degenerate:
            raise NotSpdError(
                "conditional has a singular gamma parameter", {"rank": self.rank}
            )
        return MgigParams(self.lambda_, self.psi, self.gamma)

    def regularized(self, eps: float) -> MgigParams:
        return MgigParams(
            self.lambda_, self.psi, self.gamma + eps * np.eye(self.dim)
        )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔗 Samplers and chains
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class SamplerName(Enum):
    """Transition kernels targeting an MGIG distribution."""

    GS = "GS"
    MH1 = "MH1"
    MH2 = "MH2"
    HR = "HR"


_MH2_PATTERN = re.compile(r"^MH2(?:\((?P<rho>[^)]+)\))?$")


@dataclass(frozen=True)
class SamplerKind:
    """A kernel choice; MH2 carries its proposal offset ρ > 0."""

    name: SamplerName
    rho: Optional[float] = None

    def __post_init__(self) -> None:
        if self.name is SamplerName.MH2:
            from mgig_lab.config import DEFAULT_RHO

            rho = DEFAULT_RHO if self.rho is None else float(self.rho)
            if not rho > 0:
                raise InvalidParamsError("MH2 needs rho > 0", {"rho": rho})
            object.__setattr__(self, "rho", rho)
        elif self.rho is not None:
            raise InvalidParamsError(f"{self.name.value} takes no rho")

    @classmethod
    def gs(cls) -> "SamplerKind":
        return cls(SamplerName.GS)

    @classmethod
    def mh1(cls) -> "SamplerKind":
        return cls(SamplerName.MH1)

    @classmethod
    def mh2(cls, rho: Optional[float] = None) -> "SamplerKind":
        return cls(SamplerName.MH2, rho)

    @classmethod
    def hr(cls) -> "SamplerKind":
        return cls(SamplerName.HR)

    @classmethod
    def parse(cls, text: str) -> "SamplerKind":
        """Parse ``GS``, ``MH1``, ``HR``, ``MH2`` or ``MH2(<rho>)``."""
        token = text.strip().upper()
        match = _MH2_PATTERN.match(token)
        if match:
            rho = match.group("rho")
            try:
                return cls.mh2(float(rho) if rho is not None else None)
            except ValueError as exc:
                raise InvalidParamsError(f"bad MH2 rho in {text!r}") from exc
        try:
            return cls(SamplerName(token))
        except ValueError as exc:
            raise InvalidParamsError(f"unknown sampler {text!r}") from exc

    @property
    def label(self) -> str:
        if self.name is SamplerName.MH2:
            return f"MH2({self.rho:g})"
        return self.name.value

    @property
    def needs_wishart_proposal(self) -> bool:
        return self.name in (SamplerName.MH1, SamplerName.MH2)


@dataclass(frozen=True)
class ChainStep:
    """One recorded transition. ``log_ratio`` is the unclamped MH log-ratio."""

    sigma: SpdMatrix
    accepted: bool = True
    log_accept_prob: float = 0.0
    log_ratio: float = 0.0


@dataclass
class Chain:
    """Post-burn-in, thinned record of one kernel run."""

    steps: List[ChainStep]
    params: MgigParams
    kind: SamplerKind
    burn_in: int
    thin: int
    n_iter: int = 0
    wall_seconds: float = 0.0
    accept_count: int = 0

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def dim(self) -> int:
        return self.params.dim

    def sigmas(self) -> FloatArray:
        """Recorded draws stacked into an (n, p, p) array."""
        if not self.steps:
            return np.empty((0, self.dim, self.dim))
        return np.stack([step.sigma for step in self.steps])

    @property
    def acceptance_rate(self) -> float:
        """Fraction of accepted proposals over every iteration, burn-in included."""
        if self.n_iter <= 0:
            return float("nan")
        return self.accept_count / self.n_iter


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📊 Diagnostics records
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class EssEstimate:
    value: float
    degenerate: bool = False


@dataclass(frozen=True)
class EssReport:
    """Per-entry ESS over the p(p+1)/2 upper-triangle series of a chain."""

    per_entry: Tuple[float, ...]
    mean_ess: float
    ess_per_second: float
    wall_seconds: float
    degenerate: Tuple[bool, ...] = field(default_factory=tuple)
    n_samples: int = 0


@dataclass(frozen=True)
class AarEstimate:
    """Average acceptance rate of the Wishart-proposal kernel."""

    value: float
    mc_std_error: float
    n_pairs: int
    expectation_value: float = float("nan")


class ResultRow(TypedDict):
    """One results.csv row."""

    sampler: str
    p: int
    scenario: str
    replicate: int
    mean_ess: float
    ess_per_sec: float
    wall_s: float
    accept_rate: float
    status: str


class TraceRecord(TypedDict, total=False):
    """One traces.jsonl line."""

    cell: int
    label: str
    replicate: int
    iteration: int
    values: Dict[str, float]
