"""Chain diagnostics: ESS, R-hat, summaries, AAR and GIG moment oracles."""

from typing import List

from mgig_lab.diagnostics.aar import aar_indicator, estimate_aar, summarize_pairs
from mgig_lab.diagnostics.ess import (
    ChainSummary,
    autocorrelation,
    chain_summary,
    ess,
    ess_detail,
    ess_matrix_chain,
    mc_std_errors,
    split_rhat,
)
from mgig_lab.diagnostics.oracle import (
    gig_boundary_moment,
    gig_moment,
    gig_moment_oracle,
)

__all__: List[str] = [
    "ChainSummary",
    "aar_indicator",
    "autocorrelation",
    "chain_summary",
    "ess",
    "ess_detail",
    "ess_matrix_chain",
    "estimate_aar",
    "gig_boundary_moment",
    "gig_moment",
    "gig_moment_oracle",
    "mc_std_errors",
    "split_rhat",
    "summarize_pairs",
]
