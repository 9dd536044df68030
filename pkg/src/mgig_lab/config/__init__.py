"""
Configuration package for MGIG Lab.

Re-exports the constants and getters from :mod:`mgig_lab.config.config` so
callers can write ``from mgig_lab.config import get_tolerances``.
"""

from typing import List

from mgig_lab.config.config import (
    AUTHORS,
    CLI_NAME,
    CPU_COUNT,
    DEBUG_MODE,
    DEFAULT_AAR_PAIRS,
    DEFAULT_BURN_IN,
    DEFAULT_DIMS,
    DEFAULT_GS_SUBSAMPLE_GAP,
    DEFAULT_INNER_ITERS,
    DEFAULT_LAMBDA,
    DEFAULT_N_ITER,
    DEFAULT_OMEGA_GS_SCANS,
    DEFAULT_REPLICATES,
    DEFAULT_RHO,
    DEFAULT_SEED,
    DEFAULT_THIN,
    DISABLE_PROGRESS_BARS,
    LOG_LEVEL,
    MIN_AAR_PAIRS,
    MIN_ESS_SERIES_LENGTH,
    PACKAGE_NAME,
    PACKAGE_NAME_NORMALIZED,
    RESULTS_COLUMNS,
    RESULTS_SCHEMA_VERSION,
    SLOW_TESTS,
    VERSION,
    Tolerances,
    default_thread_count,
    get_author_string,
    get_config_summary,
    get_email_string,
    get_runtime_config,
    get_system_info,
    get_tolerances,
    get_version_string,
    get_version_tuple,
    is_debug_mode,
    reset_runtime_config,
    runtime_config,
    update_runtime_config,
)

__all__: List[str] = [
    # Metadata
    "AUTHORS",
    "CLI_NAME",
    "PACKAGE_NAME",
    "PACKAGE_NAME_NORMALIZED",
    "VERSION",
    "RESULTS_COLUMNS",
    "RESULTS_SCHEMA_VERSION",
    # Environment
    "CPU_COUNT",
    "DEBUG_MODE",
    "DISABLE_PROGRESS_BARS",
    "LOG_LEVEL",
    "SLOW_TESTS",
    # Defaults
    "DEFAULT_AAR_PAIRS",
    "DEFAULT_BURN_IN",
    "DEFAULT_DIMS",
    "DEFAULT_GS_SUBSAMPLE_GAP",
    "DEFAULT_INNER_ITERS",
    "DEFAULT_LAMBDA",
    "DEFAULT_N_ITER",
    "DEFAULT_OMEGA_GS_SCANS",
    "DEFAULT_REPLICATES",
    "DEFAULT_RHO",
    "DEFAULT_SEED",
    "DEFAULT_THIN",
    "MIN_AAR_PAIRS",
    "MIN_ESS_SERIES_LENGTH",
    # Tolerances
    "Tolerances",
    "get_tolerances",
    # Getters and runtime state
    "default_thread_count",
    "get_author_string",
    "get_config_summary",
    "get_email_string",
    "get_runtime_config",
    "get_system_info",
    "get_version_string",
    "get_version_tuple",
    "is_debug_mode",
    "reset_runtime_config",
    "runtime_config",
    "update_runtime_config",
]
