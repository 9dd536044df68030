# 🌀 MGIG Lab package root

"""
MGIG Lab - MCMC samplers for matrix generalized inverse Gaussian distributions.

Key Features:
- Blocked Gibbs sampler on the unit-lower Cholesky coordinates
- Wishart-proposal (MH1, MH2) and hit-and-run Metropolis-Hastings kernels
- Matsumoto-Yor reduction for rank-deficient parameters
- ESS, split R-hat and average-acceptance-rate diagnostics
- Partial Gaussian graphical model and matrix skew-t Gibbs samplers
- ``mgig-lab`` command line for benchmarks and model studies
"""

from typing import List

from .config import VERSION as __version__
from .config import get_author_string, get_email_string, is_debug_mode
from .core.exceptions import MgigError
from .core.random_core import RngStream
from .samplers import (
    sample_chain,
    sample_singular_gamma,
    sample_via_matsumoto_yor,
)
from .utils.type_definitions import (
    Chain,
    DegenerateMgigParams,
    MgigParams,
    SamplerKind,
)

__author__ = get_author_string()
__email__ = get_email_string()
__license__ = "MIT"
__description__ = "MCMC samplers for matrix generalized inverse Gaussian distributions"

__all__: List[str] = [
    "Chain",
    "DegenerateMgigParams",
    "MgigError",
    "MgigParams",
    "RngStream",
    "SamplerKind",
    "sample_chain",
    "sample_singular_gamma",
    "sample_via_matsumoto_yor",
    "__version__",
]

if is_debug_mode():
    print(f"🔍 MGIG Lab v{__version__} loaded in debug mode")
