"""
MGIG samplers: density, full conditionals, the four transition kernels,
chain orchestration and the Matsumoto-Yor composition for singular Γ.
"""

from typing import List

from mgig_lab.samplers.chain import (
    KernelRunner,
    advance,
    default_init,
    sample_chain,
    sample_matsumoto_yor_draws,
    sample_singular_gamma,
    sample_via_matsumoto_yor,
)
from mgig_lab.samplers.mgig import (
    ModeCache,
    canonicalize,
    cond_a_params,
    cond_b_params,
    gibbs_step,
    hr_direction,
    hr_log_ratio,
    hr_propose,
    hr_step,
    invert_params,
    log_density_unnorm,
    log_exp_jacobian,
    log_joint_cholesky,
    mh1_log_ratio,
    mh1_proposal,
    mh1_step,
    mh2_log_ratio,
    mh2_proposal,
    mh2_step,
)

__all__: List[str] = [
    # Density
    "log_density_unnorm",
    "log_joint_cholesky",
    "invert_params",
    "canonicalize",
    # Conditionals and Gibbs
    "cond_a_params",
    "cond_b_params",
    "gibbs_step",
    # Metropolis-Hastings
    "ModeCache",
    "mh1_proposal",
    "mh1_log_ratio",
    "mh1_step",
    "mh2_proposal",
    "mh2_log_ratio",
    "mh2_step",
    "hr_direction",
    "hr_propose",
    "hr_log_ratio",
    "log_exp_jacobian",
    "hr_step",
    # Chains
    "KernelRunner",
    "advance",
    "default_init",
    "sample_chain",
    "sample_via_matsumoto_yor",
    "sample_matsumoto_yor_draws",
    "sample_singular_gamma",
]
