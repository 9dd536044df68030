#!/usr/bin/env python3
"""
Experiment configuration files.

A config is a TOML document with shared run settings at the top level and one
table per command::

    command = "benchmark"
    seed = 20260101
    n_iter = 5000
    burn_in = 500

    [benchmark]
    dims = [5, 10, 20]
    scenario = ["I", "II", "III"]
    samplers = ["GS", "MH1", "MH2", "HR"]

Unknown keys are rejected and every error names the offending field.
Command-line flags override file values, which override the defaults below.
``serialize_config`` writes a config back deterministically so that
parse → serialize → parse is the identity.
"""

import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import tomllib

from mgig_lab.config import (
    DEFAULT_AAR_PAIRS,
    DEFAULT_BURN_IN,
    DEFAULT_DIMS,
    DEFAULT_GS_SUBSAMPLE_GAP,
    DEFAULT_LAMBDA,
    DEFAULT_N_ITER,
    DEFAULT_OMEGA_GS_SCANS,
    DEFAULT_REPLICATES,
    DEFAULT_RHO,
    DEFAULT_SEED,
    DEFAULT_THIN,
    MIN_AAR_PAIRS,
)
from mgig_lab.core.exceptions import ConfigError, MgigError
from mgig_lab.models.pggm import ORDER_DERIVED, ORDER_VERBATIM, OmegaScheme
from mgig_lab.utils.type_definitions import SamplerKind, SamplerName

logger = logging.getLogger(__name__)

COMMANDS: Tuple[str, ...] = ("benchmark", "aar", "pggm-sim", "mst-sim")
SCENARIOS: Tuple[str, ...] = ("I", "II", "III", "custom")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📋 Sections
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class BenchmarkSettings:
    dims: Tuple[int, ...] = DEFAULT_DIMS
    lambda_: float = DEFAULT_LAMBDA
    scenario: Tuple[str, ...] = ("I", "II", "III")
    samplers: Tuple[str, ...] = ("GS", "MH1", "MH2", "HR")
    rho: float = DEFAULT_RHO
    psi: Optional[Tuple[Tuple[float, ...], ...]] = None
    gamma: Optional[Tuple[Tuple[float, ...], ...]] = None
    traces: bool = False


@dataclass(frozen=True)
class AarSettings:
    dim: int = 2
    lambdas: Tuple[float, ...] = (-0.9, 0.0, 2.0, 10.0, 50.0)
    psi_scales: Tuple[float, ...] = (1.0,)
    n_pairs: int = DEFAULT_AAR_PAIRS
    gs_subsample_gap: int = DEFAULT_GS_SUBSAMPLE_GAP


@dataclass(frozen=True)
class PggmSettings:
    q: Tuple[int, ...] = (3,)
    p: int = 10
    n: int = 100
    schemes: Tuple[str, ...] = ("GS", "MH1", "HR", "MI")
    mse_every: int = 500
    omega_gs_scans: int = DEFAULT_OMEGA_GS_SCANS
    order: str = ORDER_DERIVED


@dataclass(frozen=True)
class MstSettings:
    p: int = 2
    q: int = 2
    n: int = 50
    nu: Tuple[float, ...] = (5.0, 10.0)
    skewness: float = 2.0
    samplers: Tuple[str, ...] = ("GS", "MH1", "HR")
    compare_matrix_t: bool = True
    psi_constraint: str = "conditional"


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment configuration."""

    command: str = "benchmark"
    seed: int = DEFAULT_SEED
    n_iter: int = DEFAULT_N_ITER
    burn_in: int = DEFAULT_BURN_IN
    thin: int = DEFAULT_THIN
    replicates: int = DEFAULT_REPLICATES
    output_dir: str = "results"
    threads: Optional[int] = None
    benchmark: BenchmarkSettings = field(default_factory=BenchmarkSettings)
    aar: AarSettings = field(default_factory=AarSettings)
    pggm: PggmSettings = field(default_factory=PggmSettings)
    mst: MstSettings = field(default_factory=MstSettings)

    def sampler_kinds(self) -> List[SamplerKind]:
        """Benchmark samplers; a bare MH2 takes the configured rho."""
        kinds = []
        for text in self.benchmark.samplers:
            kind = SamplerKind.parse(text)
            if kind.name is SamplerName.MH2 and "(" not in text:
                kind = SamplerKind.mh2(self.benchmark.rho)
            kinds.append(kind)
        return kinds


# TOML key ↔ dataclass field where they differ.
_KEY_ALIASES = {"lambda": "lambda_"}
_FIELD_KEYS = {v: k for k, v in _KEY_ALIASES.items()}
_SECTIONS = {
    "benchmark": BenchmarkSettings,
    "aar": AarSettings,
    "pggm": PggmSettings,
    "mst": MstSettings,
}


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔍 Coercion helpers
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _fail(where: str, message: str) -> ConfigError:
    return ConfigError(f"{where}: {message}", {"field": where})


def _as_int(where: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(where, f"expected an integer, got {value!r}")
    return value


def _as_float(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(where, f"expected a number, got {value!r}")
    return float(value)


def _as_str(where: str, value: Any) -> str:
    if not isinstance(value, str):
        raise _fail(where, f"expected a string, got {value!r}")
    return value


def _as_bool(where: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise _fail(where, f"expected true or false, got {value!r}")
    return value


def _as_list(where: str, value: Any, allow_scalar: bool = False) -> List[Any]:
    if isinstance(value, list):
        return value
    if allow_scalar:
        return [value]
    raise _fail(where, f"expected a list, got {value!r}")


def _as_matrix(where: str, value: Any) -> Tuple[Tuple[float, ...], ...]:
    rows = _as_list(where, value)
    matrix = tuple(
        tuple(_as_float(f"{where}[{i}]", x) for x in _as_list(f"{where}[{i}]", row))
        for i, row in enumerate(rows)
    )
    if not matrix or any(len(row) != len(matrix) for row in matrix):
        raise _fail(where, "expected a square matrix given as a list of rows")
    return matrix


def _coerce(where: str, name: str, value: Any) -> Any:
    """Convert one TOML value to the field's Python type."""
    if name == "dims" or (name == "q" and where.startswith("[pggm]")):
        return tuple(
            _as_int(f"{where}[{i}]", v) for i, v in enumerate(_as_list(where, value, True))
        )
    if name in ("lambdas", "psi_scales", "nu"):
        return tuple(
            _as_float(f"{where}[{i}]", v) for i, v in enumerate(_as_list(where, value, True))
        )
    if name in ("scenario", "samplers", "schemes"):
        return tuple(
            _as_str(f"{where}[{i}]", v) for i, v in enumerate(_as_list(where, value, True))
        )
    if name in ("psi", "gamma"):
        return _as_matrix(where, value)
    if name in ("traces", "compare_matrix_t"):
        return _as_bool(where, value)
    if name in ("lambda_", "rho", "skewness"):
        return _as_float(where, value)
    if name in ("command", "output_dir", "order", "psi_constraint"):
        return _as_str(where, value)
    return _as_int(where, value)


def _build_section(name: str, table: Any) -> Any:
    cls = _SECTIONS[name]
    if not isinstance(table, dict):
        raise _fail(f"[{name}]", "expected a table")
    known = {f.name for f in fields(cls)}
    values: Dict[str, Any] = {}
    for key, raw in table.items():
        attr = _KEY_ALIASES.get(key, key)
        if attr not in known:
            raise _fail(f"[{name}].{key}", "unknown key")
        values[attr] = _coerce(f"[{name}].{key}", attr, raw)
    return cls(**values)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📥 Parsing and validation
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def config_from_mapping(document: Mapping[str, Any]) -> ExperimentConfig:
    """Build and validate a config from a parsed TOML mapping."""
    top_level = {f.name for f in fields(ExperimentConfig)} - set(_SECTIONS)
    values: Dict[str, Any] = {}
    for key, raw in document.items():
        if key in _SECTIONS:
            values[key] = _build_section(key, raw)
        elif key in top_level:
            values[key] = _coerce(key, key, raw)
        else:
            raise _fail(key, "unknown key")
    cfg = ExperimentConfig(**values)
    validate_config(cfg)
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse a TOML document into a validated config.

    Raises:
        ConfigError: On TOML syntax errors (with line and column), unknown
            keys, wrong types or out-of-range values
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return config_from_mapping(document)


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    cfg = parse_config(text)
    logger.debug("Loaded %s config from %s", cfg.command, path)
    return cfg


def apply_overrides(
    cfg: ExperimentConfig,
    command: Optional[str] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    threads: Optional[int] = None,
) -> ExperimentConfig:
    """Command-line values win over file values."""
    if command is not None and command != cfg.command:
        raise ConfigError(
            f"config is for {cfg.command!r} but the {command!r} command was run",
            {"field": "command"},
        )
    updates: Dict[str, Any] = {}
    if seed is not None:
        updates["seed"] = seed
    if output_dir is not None:
        updates["output_dir"] = output_dir
    if threads is not None:
        updates["threads"] = threads
    out = replace(cfg, **updates)
    validate_config(out)
    return out


def _require(condition: bool, where: str, message: str) -> None:
    if not condition:
        raise _fail(where, message)


def validate_config(cfg: ExperimentConfig) -> None:
    """
    Check every field the selected command uses.

    Raises:
        ConfigError: Naming the first offending field
    """
    _require(cfg.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
    _require(0 <= cfg.seed < 2**64, "seed", "must be a 64-bit unsigned integer")
    _require(cfg.burn_in >= 0, "burn_in", "must be nonnegative")
    _require(cfg.n_iter > cfg.burn_in, "n_iter", "must exceed burn_in")
    _require(cfg.thin >= 1, "thin", "must be at least 1")
    _require(cfg.replicates >= 1, "replicates", "must be at least 1")
    _require(bool(cfg.output_dir), "output_dir", "must not be empty")
    _require(cfg.threads is None or cfg.threads >= 1, "threads", "must be at least 1")

    if cfg.command == "benchmark":
        _validate_benchmark(cfg)
    elif cfg.command == "aar":
        _validate_aar(cfg.aar)
    elif cfg.command == "pggm-sim":
        _validate_pggm(cfg.pggm)
    else:
        _validate_mst(cfg.mst)


def _validate_benchmark(cfg: ExperimentConfig) -> None:
    bench = cfg.benchmark
    _require(bool(bench.dims), "[benchmark].dims", "must not be empty")
    _require(all(p >= 1 for p in bench.dims), "[benchmark].dims", "entries must be ≥ 1")
    _require(bool(bench.scenario), "[benchmark].scenario", "must not be empty")
    for name in bench.scenario:
        _require(name in SCENARIOS, "[benchmark].scenario", f"unknown scenario {name!r}")
    _require(bool(bench.samplers), "[benchmark].samplers", "must not be empty")
    _require(bench.rho > 0, "[benchmark].rho", "must be positive")
    _require(math.isfinite(bench.lambda_), "[benchmark].lambda", "must be finite")
    try:
        cfg.sampler_kinds()
    except MgigError as exc:
        raise _fail("[benchmark].samplers", exc.message) from exc
    if "custom" in bench.scenario:
        _require(
            bench.psi is not None and bench.gamma is not None,
            "[benchmark].psi",
            "custom scenario needs psi and gamma",
        )
        size = len(bench.psi or ())
        _require(len(bench.gamma or ()) == size, "[benchmark].gamma", "must match psi")
        _require(
            all(p == size for p in bench.dims),
            "[benchmark].dims",
            f"custom scenario matrices are {size}×{size}",
        )


def _validate_aar(aar: AarSettings) -> None:
    _require(aar.dim >= 1, "[aar].dim", "must be at least 1")
    _require(bool(aar.lambdas), "[aar].lambdas", "grid must not be empty")
    _require(bool(aar.psi_scales), "[aar].psi_scales", "grid must not be empty")
    _require(all(lam > -1 for lam in aar.lambdas), "[aar].lambdas", "entries must exceed -1")
    _require(all(s > 0 for s in aar.psi_scales), "[aar].psi_scales", "entries must be positive")
    _require(aar.n_pairs >= MIN_AAR_PAIRS, "[aar].n_pairs", f"must be at least {MIN_AAR_PAIRS}")
    _require(aar.gs_subsample_gap >= 1, "[aar].gs_subsample_gap", "must be at least 1")


def _validate_pggm(pggm: PggmSettings) -> None:
    _require(bool(pggm.q) and all(q >= 1 for q in pggm.q), "[pggm].q", "entries must be ≥ 1")
    _require(pggm.p >= 1, "[pggm].p", "must be at least 1")
    _require(pggm.n >= 1, "[pggm].n", "must be at least 1")
    _require(bool(pggm.schemes), "[pggm].schemes", "must not be empty")
    for name in pggm.schemes:
        try:
            OmegaScheme.parse(name)
        except MgigError as exc:
            raise _fail("[pggm].schemes", exc.message) from exc
    _require(pggm.mse_every >= 0, "[pggm].mse_every", "must be nonnegative")
    _require(pggm.omega_gs_scans >= 1, "[pggm].omega_gs_scans", "must be at least 1")
    _require(
        pggm.order in (ORDER_DERIVED, ORDER_VERBATIM),
        "[pggm].order",
        f"must be {ORDER_DERIVED!r} or {ORDER_VERBATIM!r}",
    )


def _validate_mst(mst: MstSettings) -> None:
    _require(mst.p >= 1 and mst.q >= 1, "[mst].p", "p and q must be at least 1")
    _require(mst.n >= 1, "[mst].n", "must be at least 1")
    _require(bool(mst.nu), "[mst].nu", "must not be empty")
    _require(all(nu > mst.p + 1 for nu in mst.nu), "[mst].nu", "entries must exceed p + 1")
    _require(bool(mst.samplers), "[mst].samplers", "must not be empty")
    for name in mst.samplers:
        _require(
            name.strip().upper() in ("GS", "MH1", "HR"),
            "[mst].samplers",
            f"W updates are GS, MH1 or HR, not {name!r}",
        )
    _require(
        mst.psi_constraint in ("conditional", "rescale"),
        "[mst].psi_constraint",
        "must be 'conditional' or 'rescale'",
    )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📤 Serialization
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def _toml_lines(record: Any, skip: Sequence[str] = ()) -> List[str]:
    lines = []
    for f in fields(record):
        if f.name in skip:
            continue
        value = getattr(record, f.name)
        if value is None:
            continue
        lines.append(f"{_FIELD_KEYS.get(f.name, f.name)} = {_toml_value(value)}")
    return lines


def serialize_config(cfg: ExperimentConfig) -> str:
    """Deterministic TOML rendering of a config."""
    lines = _toml_lines(cfg, skip=tuple(_SECTIONS))
    for name in _SECTIONS:
        lines.append("")
        lines.append(f"[{name}]")
        lines.extend(_toml_lines(getattr(cfg, name)))
    return "\n".join(lines) + "\n"


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """JSON-friendly echo of the config for manifests and --dry-run."""
    return tomllib.loads(serialize_config(cfg))
