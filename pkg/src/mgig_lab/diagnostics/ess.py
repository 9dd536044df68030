#!/usr/bin/env python3
"""
Effective sample size and chain summaries.

ESS follows Geyer's initial monotone sequence estimator: sample
autocorrelations ρ̂_k are summed in adjacent pairs Γ_m = ρ̂_{2m} + ρ̂_{2m+1}
while the pairs stay positive, each pair capped by its predecessor, and
τ = -1 + 2 Σ Γ_m. ESS = n / τ clipped to (0, n].
"""

import logging
import math
from typing import List, NamedTuple, Sequence

import numpy as np

from mgig_lab.config import MIN_ESS_SERIES_LENGTH
from mgig_lab.core.exceptions import EmptyChainError, SeriesTooShortError
from mgig_lab.core.matrix_core import spd_inverse
from mgig_lab.utils.type_definitions import (
    Chain,
    EssEstimate,
    EssReport,
    FloatArray,
)

logger = logging.getLogger(__name__)


def _as_series(series: Sequence[float], minimum: int) -> FloatArray:
    x = np.asarray(series, dtype=np.float64).reshape(-1)
    if x.shape[0] < minimum:
        raise SeriesTooShortError(
            "series too short for autocorrelation estimates",
            {"length": int(x.shape[0]), "minimum": minimum},
        )
    return x


def autocorrelation(series: Sequence[float]) -> FloatArray:
    """
    Sample autocorrelations ρ̂_0..ρ̂_{n-1} via a zero-padded FFT.

    Uses the biased autocovariance (divisor n). A constant series returns
    ρ̂_0 = 1 followed by zeros.
    """
    x = _as_series(series, 2)
    n = x.shape[0]
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n] / n
    if acov[0] <= 0:
        out = np.zeros(n)
        out[0] = 1.0
        return out
    return acov / acov[0]


def _is_constant(x: FloatArray) -> bool:
    spread = float(np.max(x) - np.min(x))
    return spread <= 1e-14 * max(1.0, float(np.max(np.abs(x))))


def ess_detail(series: Sequence[float]) -> EssEstimate:
    """ESS together with the constant-series flag."""
    x = _as_series(series, MIN_ESS_SERIES_LENGTH)
    n = x.shape[0]
    if _is_constant(x):
        return EssEstimate(value=float(n), degenerate=True)

    rho = autocorrelation(x)
    tau = -1.0
    previous = math.inf
    for m in range(n // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0:
            break
        pair = min(pair, previous)
        tau += 2.0 * pair
        previous = pair
    tau = max(tau, 1.0 / n)
    return EssEstimate(value=float(min(n, n / tau)), degenerate=False)


def ess(series: Sequence[float]) -> float:
    """
    Effective sample size of a scalar series.

    Args:
        series: At least MIN_ESS_SERIES_LENGTH values

    Returns:
        ESS in (0, n]; a constant series reports n

    Raises:
        SeriesTooShortError: If the series is too short
    """
    return ess_detail(series).value


def _upper_series(chain: Chain) -> List[FloatArray]:
    if len(chain) == 0:
        raise EmptyChainError("chain has no recorded steps")
    sigmas = chain.sigmas()
    rows, cols = np.triu_indices(chain.dim)
    return [sigmas[:, i, j] for i, j in zip(rows, cols)]


def ess_matrix_chain(chain: Chain) -> EssReport:
    """
    ESS of each of the p(p+1)/2 upper-triangle entry series (row-major).

    ``ess_per_second`` divides the mean ESS by the kernel wall time and is
    NaN when no time was recorded.
    """
    estimates = [ess_detail(s) for s in _upper_series(chain)]
    per_entry = tuple(e.value for e in estimates)
    mean_ess = float(np.mean(per_entry))
    wall = chain.wall_seconds
    per_second = mean_ess / wall if wall > 0 else float("nan")
    return EssReport(
        per_entry=per_entry,
        mean_ess=mean_ess,
        ess_per_second=per_second,
        wall_seconds=wall,
        degenerate=tuple(e.degenerate for e in estimates),
        n_samples=len(chain),
    )


def mc_std_errors(draws: FloatArray) -> FloatArray:
    """
    Entrywise Monte Carlo standard errors sd/√ESS of stacked draws.

    Entries whose ESS is undefined (too few draws or a constant series) get NaN.
    """
    draws = np.asarray(draws, dtype=np.float64)
    n = draws.shape[0]
    flat = draws.reshape(n, -1)
    out = np.full(flat.shape[1], np.nan)
    if n < MIN_ESS_SERIES_LENGTH:
        return out.reshape(draws.shape[1:])
    for idx in range(flat.shape[1]):
        estimate = ess_detail(flat[:, idx])
        if not estimate.degenerate:
            out[idx] = float(np.std(flat[:, idx], ddof=1)) / math.sqrt(estimate.value)
    return out.reshape(draws.shape[1:])


class ChainSummary(NamedTuple):
    mean: FloatArray
    mean_inverse: FloatArray
    entry_std_errors: FloatArray


def chain_summary(chain: Chain) -> ChainSummary:
    """Entrywise means of Σ and Σ⁻¹ with sd/√ESS standard errors for Σ."""
    if len(chain) == 0:
        raise EmptyChainError("chain has no recorded steps")
    sigmas = chain.sigmas()
    inverses = np.stack([spd_inverse(s) for s in sigmas])
    return ChainSummary(
        mean=sigmas.mean(axis=0),
        mean_inverse=inverses.mean(axis=0),
        entry_std_errors=mc_std_errors(sigmas),
    )


def split_rhat(series_list: Sequence[Sequence[float]]) -> float:
    """
    Potential scale reduction over chains split in halves.

    Args:
        series_list: One scalar series per chain, equal lengths of at least 4

    Returns:
        √(((n-1)/n·W + B/n) / W); 1.0 when every half is constant and equal
    """
    halves: List[FloatArray] = []
    for series in series_list:
        x = _as_series(series, 4)
        half = x.shape[0] // 2
        halves.extend([x[:half], x[x.shape[0] - half :]])
    n = min(h.shape[0] for h in halves)
    stacked = np.stack([h[:n] for h in halves])
    means = stacked.mean(axis=1)
    within = float(np.mean(stacked.var(axis=1, ddof=1)))
    between = n * float(np.var(means, ddof=1))
    if within <= 0:
        return 1.0 if between <= 0 else math.inf
    pooled = (n - 1) / n * within + between / n
    return math.sqrt(pooled / within)
