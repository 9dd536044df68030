#!/usr/bin/env python3
# ╔══════════════════════════════════════════════════════════════════════════╗
# ║                         MGIG LAB CONFIGURATION                           ║
# ╠══════════════════════════════════════════════════════════════════════════╣
# ║ 📐 Tolerances | 🎲 Sampler defaults | 🔧 Environment | ⚙️ Runtime state   ║
# ╚══════════════════════════════════════════════════════════════════════════╝

"""
Configuration module for MGIG Lab.

Central source of truth for version information, numerical tolerances,
experiment defaults and environment-driven switches. Everything that is a
magic number somewhere else in the package should be a named value here.
"""

import datetime
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any, Dict, Tuple


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🖥️ Host Environment
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
SYSTEM = platform.system().lower()
CPU_COUNT = os.cpu_count() or 2
IS_CI_ENV = any(
    env in os.environ for env in ["CI", "GITHUB_ACTIONS", "GITLAB_CI", "TRAVIS"]
)

# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📦 Package Metadata - Single Source of Truth
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
PACKAGE_NAME = "MGIG Lab"
PACKAGE_NAME_NORMALIZED = "mgig_lab"
CLI_NAME = "mgig-lab"
VERSION_MAJOR = 0
VERSION_MINOR = 3
VERSION_PATCH = 0
VERSION = f"{VERSION_MAJOR}.{VERSION_MINOR}.{VERSION_PATCH}"
VERSION_RELEASE_DATE = "2026-10-19"

AUTHORS = [
    {"name": "Lloyd Handyside", "email": "ace1928@gmail.com"},
    {"name": "Eidos", "email": "syntheticeidos@gmail.com"},
]

# Bumped whenever the results.csv column list changes.
RESULTS_SCHEMA_VERSION = 1
RESULTS_COLUMNS: Tuple[str, ...] = (
    "sampler",
    "p",
    "scenario",
    "replicate",
    "mean_ess",
    "ess_per_sec",
    "wall_s",
    "accept_rate",
    "status",
)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📐 Numerical Tolerances
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class Tolerances:
    """Thresholds shared by every linear-algebra check in the package."""

    tol_sym: float = 1e-10  # |m - mᵀ| relative to max(1, ‖m‖_max)
    eps_spd_rel: float = 1e-12  # smallest eigenvalue relative to the largest
    rank_rel: float = 1e-10  # singular values below this × largest are zero
    coincident_rel: float = 1e-12  # HR eigenvalue coincidence threshold
    riccati_rel: float = 1e-9
    regularize_rel: float = 1e-8  # εI = regularize_rel · tr(Ψ)/q

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@lru_cache(maxsize=1)
def get_tolerances() -> Tolerances:
    """Return the package-wide tolerance record."""
    return Tolerances()


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎲 Sampler and Experiment Defaults
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
DEFAULT_N_ITER = 5000
DEFAULT_BURN_IN = 500
DEFAULT_THIN = 1
DEFAULT_DIMS: Tuple[int, ...] = (5, 10, 20)
DEFAULT_LAMBDA = 2.0
DEFAULT_RHO = 5.0
DEFAULT_SEED = 20260101
DEFAULT_REPLICATES = 1
DEFAULT_GS_SUBSAMPLE_GAP = 10
DEFAULT_INNER_ITERS = 50
DEFAULT_AAR_PAIRS = 5000
DEFAULT_OMEGA_GS_SCANS = 1
MIN_ESS_SERIES_LENGTH = 10
MIN_AAR_PAIRS = 100


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔧 Environment Control - Runtime Configuration via Environment Variables
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
DEBUG_MODE = os.environ.get("MGIG_LAB_DEBUG") == "1"
SLOW_TESTS = os.environ.get("MGIG_LAB_SLOW") == "1"


def configure_log_level() -> str:
    """Resolve the log level from the environment. 📊"""
    base_level = os.environ.get("MGIG_LAB_LOG_LEVEL", "INFO").upper()
    return "DEBUG" if DEBUG_MODE and base_level == "INFO" else base_level


LOG_LEVEL = configure_log_level()


def configure_progress_bars() -> bool:
    """Progress bars are off in CI, when asked, or when stdout is not a tty."""
    initial_setting = os.environ.get("MGIG_LAB_NO_PROGRESS") == "1" or IS_CI_ENV
    return initial_setting or not sys.stdout.isatty()


DISABLE_PROGRESS_BARS = configure_progress_bars()


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🛠️ Getters
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@lru_cache(maxsize=8)
def get_version_string() -> str:
    """Return the full version string. ✨"""
    return VERSION


@lru_cache(maxsize=8)
def get_version_tuple() -> Tuple[int, int, int]:
    return (VERSION_MAJOR, VERSION_MINOR, VERSION_PATCH)


@lru_cache(maxsize=1)
def get_author_string() -> str:
    return ", ".join(author["name"] for author in AUTHORS)


@lru_cache(maxsize=1)
def get_email_string() -> str:
    return ", ".join(author["email"] for author in AUTHORS)


def is_debug_mode() -> bool:
    return DEBUG_MODE


def get_system_info() -> Dict[str, Any]:
    """Host facts recorded in run manifests."""
    import numpy
    import scipy

    return {
        "system": SYSTEM,
        "machine": platform.machine(),
        "cpu_count": CPU_COUNT,
        "python_version": ".".join(map(str, sys.version_info[:3])),
        "numpy_version": numpy.__version__,
        "scipy_version": scipy.__version__,
        "package_version": VERSION,
    }


def default_thread_count() -> int:
    """Worker pool size: one per core, capped, halved on CI runners."""
    base = max(1, min(8, CPU_COUNT))
    return max(1, base // 2) if IS_CI_ENV else base


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# ⚙️ Runtime Configuration - Modifiable During Execution
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _runtime_defaults() -> Dict[str, Any]:
    return {
        "threads": default_thread_count(),
        "progress": not DISABLE_PROGRESS_BARS,
        "log_level": LOG_LEVEL,
        "last_updated": time.time(),
    }


runtime_config: Dict[str, Any] = {**_runtime_defaults(), "update_count": 0}


def update_runtime_config(key: str, value: Any) -> bool:
    """
    Update a runtime configuration value with change tracking.

    Args:
        key: Configuration key to update
        value: New value to set

    Returns:
        True if update successful, False if key unknown
    """
    if key not in runtime_config:
        if DEBUG_MODE:
            print(f"⚠️ Attempted to update unknown config key: '{key}'")
        return False

    old_value = runtime_config.get(key)
    runtime_config[key] = value
    runtime_config["last_updated"] = time.time()
    runtime_config["update_count"] += 1
    if DEBUG_MODE and old_value != value:
        print(f"🔄 Config '{key}' changed: {old_value} → {value}")
    return True


def get_runtime_config(key: str, default: Any = None) -> Any:
    return runtime_config.get(key, default)


def reset_runtime_config() -> None:
    """Restore runtime configuration to its defaults, keeping the change count."""
    runtime_config.update(
        {**_runtime_defaults(), "update_count": runtime_config["update_count"] + 1}
    )


def get_config_summary() -> Dict[str, Any]:
    """Generate a summary of the current configuration state. 📋"""
    return {
        "version": get_version_string(),
        "released": VERSION_RELEASE_DATE,
        "system": f"{SYSTEM.capitalize()} ({platform.machine()})",
        "threads": runtime_config["threads"],
        "progress": runtime_config["progress"],
        "log_level": runtime_config["log_level"],
        "environment": "debug" if DEBUG_MODE else "production",
        "tolerances": get_tolerances().to_dict(),
        "last_updated": datetime.datetime.fromtimestamp(
            runtime_config["last_updated"]
        ).strftime("%Y-%m-%d %H:%M:%S"),
    }


if DEBUG_MODE:
    print(f"🔍 MGIG Lab v{VERSION} configuration loaded")
    print(f"💻 System: {SYSTEM.capitalize()} ({platform.machine()}), {CPU_COUNT} CPUs")
    print(f"📐 Tolerances: {get_tolerances().to_dict()}")
