#!/usr/bin/env python3
"""
Experiment drivers behind the CLI commands.

Each command expands its config into a grid of cells. Cell ``i`` owns the
stream ``RngStream(seed, i)``; synthetic data shared by several cells come
from ``RngStream(seed, 2**32 + replicate)`` so every sampler sees the same
data. Cells run on a thread pool, results are put back in cell order and
written by this thread only. A cell that raises is recorded with status
``error:<ClassName>`` and the run continues.
"""

import concurrent.futures
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm.auto import tqdm

from mgig_lab.cli.io import build_manifest, write_csv, write_jsonl, write_manifest
from mgig_lab.cli.settings import ExperimentConfig, config_to_dict
from mgig_lab.config import RESULTS_COLUMNS, get_runtime_config
from mgig_lab.core.exceptions import status_for
from mgig_lab.core.random_core import RngStream
from mgig_lab.diagnostics import ess_matrix_chain, estimate_aar
from mgig_lab.models.mst import (
    MstHyper,
    predictive_loss,
    run_mst_chain,
    simulate_mst,
)
from mgig_lab.models.pggm import OmegaScheme, PggmHyper, run_pggm_chain, simulate_pggm
from mgig_lab.samplers import sample_chain
from mgig_lab.utils.type_definitions import MgigParams, SamplerKind, TraceRecord

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
DATA_STREAM_OFFSET = 2**32

AAR_COLUMNS: Tuple[str, ...] = (
    "p",
    "lambda",
    "psi",
    "replicate",
    "aar",
    "mc_se",
    "aar_expectation",
    "n_pairs",
    "status",
)
PGGM_MSE_COLUMNS: Tuple[str, ...] = (
    "q",
    "scheme",
    "replicate",
    "iteration",
    "mse_omega",
    "mse_delta",
)
PGGM_ESS_COLUMNS: Tuple[str, ...] = (
    "q",
    "p",
    "scheme",
    "replicate",
    "ess_omega",
    "ess_delta",
    "ess_omega_per_sec",
    "wall_s",
    "mse_omega",
    "mse_delta",
    "status",
)
MST_LOSS_COLUMNS: Tuple[str, ...] = ("model", "nu", "sampler", "replicate", "loss", "status")
MST_ESS_COLUMNS: Tuple[str, ...] = (
    "model",
    "nu",
    "sampler",
    "replicate",
    "ess_m",
    "ess_b",
    "ess_omega",
    "wall_s",
    "status",
)


@dataclass
class CellOutcome:
    """Rows and trace records produced by one grid cell."""

    index: int
    label: str
    status: str = STATUS_OK
    rows: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    traces: List[TraceRecord] = field(default_factory=list)


@dataclass
class ExperimentResult:
    command: str
    output_dir: Path
    files: List[str]
    n_cells: int
    n_failed: int
    failed: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def all_failed(self) -> bool:
        return self.n_cells > 0 and self.n_failed == self.n_cells


CellFn = Callable[[int, Dict[str, Any]], CellOutcome]
FallbackFn = Callable[[Dict[str, Any], str], Dict[str, List[Dict[str, Any]]]]


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧵 Cell execution
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _guarded(fn: CellFn, fallback: FallbackFn, index: int, spec: Dict[str, Any]) -> CellOutcome:
    try:
        return fn(index, spec)
    except Exception as exc:
        status = status_for(exc)
        logger.warning("Cell %d (%s) failed: %s", index, spec["label"], exc)
        return CellOutcome(
            index=index, label=spec["label"], status=status, rows=fallback(spec, status)
        )


def run_cells(
    specs: Sequence[Dict[str, Any]],
    fn: CellFn,
    fallback: FallbackFn,
    threads: int,
    desc: str,
) -> List[CellOutcome]:
    """
    Run every cell and return the outcomes in cell order.

    Args:
        specs: One dict per cell; each needs a ``label``
        fn: Cell body, called as ``fn(index, spec)``
        fallback: Builds the rows recorded for a failed cell
        threads: Worker count; 1 runs inline
        desc: Progress bar caption
    """
    disable = not get_runtime_config("progress", True)
    outcomes: List[CellOutcome] = []
    with tqdm(total=len(specs), desc=desc, unit="cell", disable=disable) as bar:
        if threads <= 1:
            for index, spec in enumerate(specs):
                outcomes.append(_guarded(fn, fallback, index, spec))
                bar.update(1)
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
                futures = [
                    executor.submit(_guarded, fn, fallback, index, spec)
                    for index, spec in enumerate(specs)
                ]
                for future in concurrent.futures.as_completed(futures):
                    outcomes.append(future.result())
                    bar.update(1)
    outcomes.sort(key=lambda outcome: outcome.index)
    return outcomes


def _collect(outcomes: Sequence[CellOutcome], table: str) -> List[Dict[str, Any]]:
    return [row for outcome in outcomes for row in outcome.rows.get(table, [])]


def _thread_count(cfg: ExperimentConfig) -> int:
    return cfg.threads if cfg.threads is not None else int(get_runtime_config("threads", 1))


def _finish(
    cfg: ExperimentConfig,
    outcomes: Sequence[CellOutcome],
    tables: Sequence[Tuple[str, Sequence[str]]],
    timings: bool,
    traces: bool = False,
) -> ExperimentResult:
    """Write the tables, optional traces and the manifest."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: List[str] = []
    for name, columns in tables:
        write_csv(out / name, columns, _collect(outcomes, name))
        files.append(name)
    if traces:
        write_jsonl(out / "traces.jsonl", (r for o in outcomes for r in o.traces))
        files.append("traces.jsonl")
    manifest = build_manifest(
        command=cfg.command,
        config=config_to_dict(cfg),
        seeds={
            "seed": cfg.seed,
            "cell_stream": "RngStream(seed, cell_index)",
            "data_stream": f"RngStream(seed, {DATA_STREAM_OFFSET} + replicate)",
            "timings": timings,
        },
        files=files + ["manifest.json"],
        cells=[{"index": o.index, "label": o.label, "status": o.status} for o in outcomes],
    )
    write_manifest(out / "manifest.json", manifest)
    n_failed = sum(1 for o in outcomes if o.status != STATUS_OK)
    logger.info("%s: %d cells, %d failed, output in %s", cfg.command, len(outcomes), n_failed, out)
    return ExperimentResult(
        command=cfg.command,
        output_dir=out,
        files=sorted(files + ["manifest.json"]),
        n_cells=len(outcomes),
        n_failed=n_failed,
        failed=[
            {"index": o.index, "label": o.label, "status": o.status}
            for o in outcomes
            if o.status != STATUS_OK
        ],
    )


def _timed(value: float, timings: bool) -> Optional[float]:
    return value if timings else None


def data_stream(seed: int, replicate: int) -> RngStream:
    return RngStream(seed, DATA_STREAM_OFFSET + replicate)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📏 Benchmark
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def scenario_psi(
    name: str, p: int, custom: Optional[Sequence[Sequence[float]]] = None
) -> np.ndarray:
    """
    Ψ for a benchmark scenario: ``I`` is the identity, ``II`` is
    diag(1, …, 1, 10, 50), ``III`` is diag(1, …, p), ``custom`` is given.
    """
    if name == "I":
        return np.eye(p)
    if name == "II":
        diag = np.ones(p)
        tail = np.array([10.0, 50.0])[-p:]
        diag[p - tail.size :] = tail
        return np.diag(diag)
    if name == "III":
        return np.diag(np.arange(1.0, p + 1.0))
    if custom is None:
        raise ValueError("custom scenario needs a psi matrix")
    return np.array(custom, dtype=float)


def benchmark_specs(cfg: ExperimentConfig) -> List[Dict[str, Any]]:
    bench = cfg.benchmark
    specs = []
    for p, scenario, kind, replicate in itertools.product(
        bench.dims, bench.scenario, cfg.sampler_kinds(), range(cfg.replicates)
    ):
        specs.append(
            {
                "label": f"{kind.label} p={p} {scenario} r{replicate}",
                "p": p,
                "scenario": scenario,
                "kind": kind,
                "replicate": replicate,
            }
        )
    return specs


def run_benchmark(cfg: ExperimentConfig, timings: bool = True) -> ExperimentResult:
    """Raw ESS, ESS per second and acceptance rate per (sampler, p, scenario, replicate)."""
    bench = cfg.benchmark

    def cell(index: int, spec: Dict[str, Any]) -> CellOutcome:
        p = spec["p"]
        gamma = np.array(bench.gamma, dtype=float) if spec["scenario"] == "custom" else np.eye(p)
        params = MgigParams(bench.lambda_, scenario_psi(spec["scenario"], p, bench.psi), gamma)
        kind: SamplerKind = spec["kind"]
        chain = sample_chain(
            params, kind, cfg.n_iter, cfg.burn_in, cfg.thin, RngStream(cfg.seed, index)
        )
        report = ess_matrix_chain(chain)
        row = {
            "sampler": kind.label,
            "p": p,
            "scenario": spec["scenario"],
            "replicate": spec["replicate"],
            "mean_ess": report.mean_ess,
            "ess_per_sec": _timed(report.ess_per_second, timings),
            "wall_s": _timed(report.wall_seconds, timings),
            "accept_rate": chain.acceptance_rate,
            "status": STATUS_OK,
        }
        outcome = CellOutcome(index=index, label=spec["label"], rows={"results.csv": [row]})
        if bench.traces:
            for t, step in enumerate(chain.steps):
                sigma = step.sigma
                outcome.traces.append(
                    {
                        "cell": index,
                        "label": spec["label"],
                        "replicate": spec["replicate"],
                        "iteration": cfg.burn_in + t * cfg.thin,
                        "values": {
                            "sigma_11": float(sigma[0, 0]),
                            f"sigma_1{p}": float(sigma[0, -1]),
                            f"sigma_{p}{p}": float(sigma[-1, -1]),
                        },
                    }
                )
        return outcome

    def fallback(spec: Dict[str, Any], status: str) -> Dict[str, List[Dict[str, Any]]]:
        row: Dict[str, Any] = {column: None for column in RESULTS_COLUMNS}
        row.update(
            sampler=spec["kind"].label,
            p=spec["p"],
            scenario=spec["scenario"],
            replicate=spec["replicate"],
            status=status,
        )
        return {"results.csv": [row]}

    specs = benchmark_specs(cfg)
    outcomes = run_cells(specs, cell, fallback, _thread_count(cfg), "benchmark")
    return _finish(cfg, outcomes, [("results.csv", RESULTS_COLUMNS)], timings, bench.traces)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎯 Average acceptance rate
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def aar_psi(p: int, scale: float) -> np.ndarray:
    """Ψ = diag(ψ, 1, …, 1)."""
    diag = np.ones(p)
    diag[0] = scale
    return np.diag(diag)


def run_aar(cfg: ExperimentConfig, timings: bool = True) -> ExperimentResult:
    """AAR of the Wishart-proposal kernel over the λ × ψ grid, with Γ = I."""
    aar = cfg.aar
    specs = [
        {"label": f"λ={lam:g} ψ={scale:g} r{rep}", "lambda": lam, "psi": scale, "replicate": rep}
        for lam, scale, rep in itertools.product(aar.lambdas, aar.psi_scales, range(cfg.replicates))
    ]

    def base_row(spec: Dict[str, Any]) -> Dict[str, Any]:
        row: Dict[str, Any] = {column: None for column in AAR_COLUMNS}
        row.update(p=aar.dim, replicate=spec["replicate"], n_pairs=aar.n_pairs)
        row["lambda"] = spec["lambda"]
        row["psi"] = spec["psi"]
        return row

    def cell(index: int, spec: Dict[str, Any]) -> CellOutcome:
        params = MgigParams(spec["lambda"], aar_psi(aar.dim, spec["psi"]), np.eye(aar.dim))
        estimate = estimate_aar(
            params, aar.n_pairs, RngStream(cfg.seed, index), aar.gs_subsample_gap
        )
        row = base_row(spec)
        row.update(
            aar=estimate.value,
            mc_se=estimate.mc_std_error,
            aar_expectation=estimate.expectation_value,
            status=STATUS_OK,
        )
        return CellOutcome(index=index, label=spec["label"], rows={"aar.csv": [row]})

    def fallback(spec: Dict[str, Any], status: str) -> Dict[str, List[Dict[str, Any]]]:
        row = base_row(spec)
        row["status"] = status
        return {"aar.csv": [row]}

    outcomes = run_cells(specs, cell, fallback, _thread_count(cfg), "aar")
    return _finish(cfg, outcomes, [("aar.csv", AAR_COLUMNS)], timings)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🕸️ Partial Gaussian graphical model
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def run_pggm_sim(cfg: ExperimentConfig, timings: bool = True) -> ExperimentResult:
    """
    Simulated PGGM study: every Ω_y update scheme on the same synthetic data
    per (q, replicate). Writes the running posterior-mean MSE path, ESS per
    scheme and traces of (Ω_y)₁₁, (Ω_y)₁₂, Δ₁₄, Δ₂₄.
    """
    pg = cfg.pggm
    specs = [
        {"label": f"{scheme} q={q} r{rep}", "q": q, "scheme": scheme, "replicate": rep}
        for q, scheme, rep in itertools.product(pg.q, pg.schemes, range(cfg.replicates))
    ]

    def cell(index: int, spec: Dict[str, Any]) -> CellOutcome:
        q = spec["q"]
        scheme = OmegaScheme.parse(spec["scheme"])
        stream = data_stream(cfg.seed, spec["replicate"]).child(q)
        data, truth = simulate_pggm(q, pg.p, pg.n, stream)
        run = run_pggm_chain(
            data,
            PggmHyper.default(q, pg.p),
            scheme,
            cfg.n_iter,
            cfg.burn_in,
            cfg.thin,
            RngStream(cfg.seed, index),
            truth=truth,
            mse_every=pg.mse_every,
            gs_scans=pg.omega_gs_scans,
            order=pg.order,
        )
        final_omega = float(np.sum((run.omega_mean - truth.omega_y) ** 2))
        final_delta = float(np.sum((run.delta_mean - truth.delta) ** 2))
        per_sec = run.ess_omega / run.wall_seconds if run.wall_seconds > 0 else float("nan")
        mse_rows = [
            {
                "q": q,
                "scheme": scheme.value,
                "replicate": spec["replicate"],
                "iteration": t,
                "mse_omega": mse_omega,
                "mse_delta": mse_delta,
            }
            for t, mse_omega, mse_delta in run.mse_path
        ]
        ess_row = {
            "q": q,
            "p": pg.p,
            "scheme": scheme.value,
            "replicate": spec["replicate"],
            "ess_omega": run.ess_omega,
            "ess_delta": run.ess_delta,
            "ess_omega_per_sec": _timed(per_sec, timings),
            "wall_s": _timed(run.wall_seconds, timings),
            "mse_omega": final_omega,
            "mse_delta": final_delta,
            "status": STATUS_OK,
        }
        outcome = CellOutcome(
            index=index,
            label=spec["label"],
            rows={"pggm_mse.csv": mse_rows, "pggm_ess.csv": [ess_row]},
        )
        for t in range(run.n_recorded):
            outcome.traces.append(
                {
                    "cell": index,
                    "label": spec["label"],
                    "replicate": spec["replicate"],
                    "iteration": cfg.burn_in + t * cfg.thin,
                    "values": {key: float(series[t]) for key, series in run.traces.items()},
                }
            )
        return outcome

    def fallback(spec: Dict[str, Any], status: str) -> Dict[str, List[Dict[str, Any]]]:
        row: Dict[str, Any] = {column: None for column in PGGM_ESS_COLUMNS}
        row.update(
            q=spec["q"], p=pg.p, scheme=spec["scheme"], replicate=spec["replicate"], status=status
        )
        return {"pggm_ess.csv": [row]}

    outcomes = run_cells(specs, cell, fallback, _thread_count(cfg), "pggm-sim")
    tables = [("pggm_mse.csv", PGGM_MSE_COLUMNS), ("pggm_ess.csv", PGGM_ESS_COLUMNS)]
    return _finish(cfg, outcomes, tables, timings, traces=True)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📐 Matrix skew-t
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
MODEL_MST = "MST"
MODEL_MT = "MT"


def mst_truth(
    p: int, q: int, skewness: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Generating values: M = 0, every entry of B equal to ``skewness``, Ψ = I, Ω = I."""
    return np.zeros((p, q)), np.full((p, q), float(skewness)), np.eye(p), np.eye(q)


def run_mst_sim(cfg: ExperimentConfig, timings: bool = True) -> ExperimentResult:
    """
    Matrix skew-t study on simulated data: fit the skew-t model and, when
    requested, the matrix-t model (B ≡ 0) for each ν and W update, and report
    the posterior predictive loss and ESS of M, B and Ω.
    """
    ms = cfg.mst
    models = [MODEL_MST, MODEL_MT] if ms.compare_matrix_t else [MODEL_MST]
    specs = [
        {
            "label": f"{model} ν={nu:g} {sampler} r{rep}",
            "model": model,
            "nu": nu,
            "sampler": sampler.strip().upper(),
            "replicate": rep,
        }
        for nu, model, sampler, rep in itertools.product(
            ms.nu, models, ms.samplers, range(cfg.replicates)
        )
    ]

    def cell(index: int, spec: Dict[str, Any]) -> CellOutcome:
        nu = spec["nu"]
        m, b, psi, omega = mst_truth(ms.p, ms.q, ms.skewness)
        stream = data_stream(cfg.seed, spec["replicate"]).child(ms.nu.index(nu))
        data = simulate_mst(m, b, psi, omega, nu, ms.n, stream).data
        rng = RngStream(cfg.seed, index)
        run = run_mst_chain(
            data,
            MstHyper.default(ms.p, ms.q, nu),
            SamplerKind.parse(spec["sampler"]),
            cfg.n_iter,
            cfg.burn_in,
            cfg.thin,
            rng.child(0),
            fit_skewness=spec["model"] == MODEL_MST,
            psi_constraint=ms.psi_constraint,
        )
        loss = predictive_loss(run.states, data, rng.child(1))
        keys = {k: spec[k] for k in ("model", "nu", "sampler", "replicate")}
        loss_row = {**keys, "loss": loss, "status": STATUS_OK}
        ess_row = {
            **keys,
            "ess_m": run.ess.get("m"),
            "ess_b": run.ess.get("b"),
            "ess_omega": run.ess.get("omega"),
            "wall_s": _timed(run.wall_seconds, timings),
            "status": STATUS_OK,
        }
        return CellOutcome(
            index=index,
            label=spec["label"],
            rows={"mst_loss.csv": [loss_row], "mst_ess.csv": [ess_row]},
        )

    def fallback(spec: Dict[str, Any], status: str) -> Dict[str, List[Dict[str, Any]]]:
        keys = {k: spec[k] for k in ("model", "nu", "sampler", "replicate")}
        loss_row: Dict[str, Any] = {**keys, "loss": None, "status": status}
        ess_row: Dict[str, Any] = {column: None for column in MST_ESS_COLUMNS}
        ess_row.update(keys, status=status)
        return {"mst_loss.csv": [loss_row], "mst_ess.csv": [ess_row]}

    outcomes = run_cells(specs, cell, fallback, _thread_count(cfg), "mst-sim")
    tables = [("mst_loss.csv", MST_LOSS_COLUMNS), ("mst_ess.csv", MST_ESS_COLUMNS)]
    return _finish(cfg, outcomes, tables, timings)


RUNNERS: Dict[str, Callable[[ExperimentConfig, bool], ExperimentResult]] = {
    "benchmark": run_benchmark,
    "aar": run_aar,
    "pggm-sim": run_pggm_sim,
    "mst-sim": run_mst_sim,
}


def count_cells(cfg: ExperimentConfig) -> int:
    """Grid size of the configured command, used by ``--dry-run``."""
    if cfg.command == "benchmark":
        return len(benchmark_specs(cfg))
    if cfg.command == "aar":
        return len(cfg.aar.lambdas) * len(cfg.aar.psi_scales) * cfg.replicates
    if cfg.command == "pggm-sim":
        return len(cfg.pggm.q) * len(cfg.pggm.schemes) * cfg.replicates
    models = 2 if cfg.mst.compare_matrix_t else 1
    return len(cfg.mst.nu) * models * len(cfg.mst.samplers) * cfg.replicates
