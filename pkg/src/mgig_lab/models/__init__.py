"""
Bayesian models whose Gibbs samplers need MGIG draws.

* :mod:`mgig_lab.models.pggm`: sparse partial Gaussian graphical model
* :mod:`mgig_lab.models.mst`: matrix skew-t Wishart mixture
"""

from typing import List

from mgig_lab.models.mst import (
    MstConditionals,
    MstData,
    MstHyper,
    MstRun,
    MstSimulation,
    MstState,
    initial_mst_state,
    mst_conditionals,
    mst_gibbs_step,
    mst_log_joint,
    predictive_loss,
    run_mst_chain,
    simulate_mst,
)
from mgig_lab.models.pggm import (
    OmegaScheme,
    PggmData,
    PggmHyper,
    PggmRun,
    PggmState,
    PggmTruth,
    initial_pggm_state,
    pggm_gibbs_step,
    pggm_log_joint,
    pggm_omega_conditional,
    run_pggm_chain,
    simulate_pggm,
)

__all__: List[str] = [
    # Partial Gaussian graphical model
    "OmegaScheme",
    "PggmData",
    "PggmHyper",
    "PggmRun",
    "PggmState",
    "PggmTruth",
    "initial_pggm_state",
    "pggm_gibbs_step",
    "pggm_log_joint",
    "pggm_omega_conditional",
    "run_pggm_chain",
    "simulate_pggm",
    # Matrix skew-t
    "MstConditionals",
    "MstData",
    "MstHyper",
    "MstRun",
    "MstSimulation",
    "MstState",
    "initial_mst_state",
    "mst_conditionals",
    "mst_gibbs_step",
    "mst_log_joint",
    "predictive_loss",
    "run_mst_chain",
    "simulate_mst",
]
