"""Value types shared across MGIG Lab.

Parameter records, sampler kinds, chain records and diagnostic reports.
Import from here for consistent typing across kernels, models and the CLI.
"""

from typing import List

from mgig_lab.utils.type_definitions import (
    AarEstimate,
    Chain,
    ChainStep,
    CholeskyFactors,
    DegenerateMgigParams,
    EigenSym,
    EssEstimate,
    EssReport,
    FloatArray,
    GigParams,
    MgigConditional,
    MgigParams,
    MvnPrecisionParams,
    ResultRow,
    SamplerKind,
    SamplerName,
    SpdMatrix,
    SymMatrix,
    TraceRecord,
    WishartParams,
)

__all__: List[str] = [
    # Array aliases
    "FloatArray",
    "SpdMatrix",
    "SymMatrix",
    # Parameter records
    "CholeskyFactors",
    "DegenerateMgigParams",
    "EigenSym",
    "GigParams",
    "MgigConditional",
    "MgigParams",
    "MvnPrecisionParams",
    "WishartParams",
    # Samplers and chains
    "Chain",
    "ChainStep",
    "SamplerKind",
    "SamplerName",
    # Diagnostics and output rows
    "AarEstimate",
    "EssEstimate",
    "EssReport",
    "ResultRow",
    "TraceRecord",
]
