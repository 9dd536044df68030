#!/usr/bin/env python3
"""
Tests for the mgig-lab command line: config files, exit codes and the
result files each command writes.
"""

import contextlib
import csv
import io
import json
import tempfile
import textwrap
import unittest
from pathlib import Path
from typing import Dict, List, Tuple

from mgig_lab.__main__ import main as module_main
from mgig_lab.cli import ExperimentConfig, create_parser, main, parse_config, serialize_config
from mgig_lab.cli.experiments import (
    AAR_COLUMNS,
    MST_ESS_COLUMNS,
    PGGM_ESS_COLUMNS,
    count_cells,
    scenario_psi,
)
from mgig_lab.cli.io import MISSING, format_cell, write_jsonl
from mgig_lab.cli.settings import apply_overrides, config_to_dict
from mgig_lab.config import RESULTS_COLUMNS, get_runtime_config, reset_runtime_config
from mgig_lab.core.exceptions import ConfigError
from mgig_lab.helpers.common import print_json, print_table

BENCHMARK_TOML = """
command = "benchmark"
seed = 7
n_iter = 40
burn_in = 10

[benchmark]
dims = [2]
scenario = ["I", "III"]
samplers = ["GS", "HR", "MH2(3)"]
lambda = 1.5
traces = true
"""

AAR_TOML = """
command = "aar"
seed = 3

[aar]
dim = 2
lambdas = [2.0]
psi_scales = [1.0, 4.0]
n_pairs = 100
gs_subsample_gap = 2
"""

PGGM_TOML = """
command = "pggm-sim"
seed = 5
n_iter = 15
burn_in = 5

[pggm]
q = [2]
p = 4
n = 20
schemes = ["GS", "MI"]
mse_every = 5
"""

MST_TOML = """
command = "mst-sim"
seed = 9
n_iter = 12
burn_in = 2

[mst]
p = 2
q = 2
n = 6
nu = [5.0]
samplers = ["GS"]
"""


def _run(argv: List[str]) -> Tuple[int, str]:
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = main(argv)
    return code, buffer.getvalue()


def _read_csv(path: Path) -> List[Dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


class TempDirTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()
        reset_runtime_config()

    def write_config(self, text: str, name: str = "config.toml") -> str:
        path = self.root / name
        path.write_text(textwrap.dedent(text), encoding="utf-8")
        return str(path)


class TestConfigFiles(unittest.TestCase):
    def test_roundtrip(self) -> None:
        for text in (BENCHMARK_TOML, AAR_TOML, PGGM_TOML, MST_TOML):
            cfg = parse_config(text)
            with self.subTest(command=cfg.command):
                again = parse_config(serialize_config(cfg))
                self.assertEqual(again, cfg)
                self.assertEqual(serialize_config(again), serialize_config(cfg))

    def test_custom_matrices_roundtrip(self) -> None:
        cfg = parse_config(
            """
            command = "benchmark"
            [benchmark]
            dims = [2]
            scenario = ["custom"]
            psi = [[2.0, 0.5], [0.5, 1.0]]
            gamma = [[1.0, 0.0], [0.0, 1.0]]
            """.replace("\n            ", "\n")
        )
        self.assertEqual(cfg.benchmark.psi, ((2.0, 0.5), (0.5, 1.0)))
        self.assertEqual(parse_config(serialize_config(cfg)), cfg)

    def test_defaults(self) -> None:
        cfg = ExperimentConfig()
        self.assertEqual(cfg.benchmark.dims, (5, 10, 20))
        self.assertEqual([k.label for k in cfg.sampler_kinds()], ["GS", "MH1", "MH2(5)", "HR"])
        self.assertEqual(config_to_dict(cfg)["benchmark"]["lambda"], 2.0)

    def test_errors_name_the_field(self) -> None:
        cases = {
            'command = "benchmark"\n[benchmark]\nfoo = 1\n': "[benchmark].foo",
            'command = "benchmark"\n[benchmark]\ndims = []\n': "[benchmark].dims",
            'command = "aar"\n[aar]\nlambdas = []\n': "[aar].lambdas",
            'command = "aar"\nreplicates = 0\n': "replicates",
            'command = "benchmark"\nn_iter = 10\nburn_in = 10\n': "n_iter",
            'command = "benchmark"\n[benchmark]\nsamplers = ["MH3"]\n': "[benchmark].samplers",
            'command = "pggm-sim"\n[pggm]\nschemes = ["MH2"]\n': "[pggm].schemes",
            'command = "mst-sim"\n[mst]\nnu = [2.0]\n': "[mst].nu",
            'command = "benchmark"\nseed = "x"\n': "seed",
            "surprise = 1\n": "surprise",
        }
        for text, field_name in cases.items():
            with self.subTest(field=field_name):
                with self.assertRaises(ConfigError) as caught:
                    parse_config(text)
                self.assertIn(field_name, str(caught.exception))

    def test_toml_syntax_error(self) -> None:
        with self.assertRaises(ConfigError) as caught:
            parse_config("command = \n")
        self.assertIn("invalid TOML", str(caught.exception))

    def test_overrides(self) -> None:
        cfg = parse_config(AAR_TOML)
        moved = apply_overrides(cfg, command="aar", seed=11, output_dir="elsewhere", threads=2)
        self.assertEqual((moved.seed, moved.output_dir, moved.threads), (11, "elsewhere", 2))
        with self.assertRaises(ConfigError):
            apply_overrides(cfg, command="benchmark")

    def test_cell_counts(self) -> None:
        self.assertEqual(count_cells(parse_config(BENCHMARK_TOML)), 6)
        self.assertEqual(count_cells(parse_config(AAR_TOML)), 2)
        self.assertEqual(count_cells(parse_config(PGGM_TOML)), 2)
        self.assertEqual(count_cells(parse_config(MST_TOML)), 2)


class TestScenarios(unittest.TestCase):
    def test_scenario_matrices(self) -> None:
        self.assertEqual(scenario_psi("I", 3).tolist(), [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        self.assertEqual(scenario_psi("II", 4).diagonal().tolist(), [1.0, 1.0, 10.0, 50.0])
        self.assertEqual(scenario_psi("II", 1).diagonal().tolist(), [50.0])
        self.assertEqual(scenario_psi("III", 3).diagonal().tolist(), [1.0, 2.0, 3.0])


class TestWriters(TempDirTestCase):
    def test_format_cell(self) -> None:
        self.assertEqual(format_cell(None), MISSING)
        self.assertEqual(format_cell(float("nan")), MISSING)
        self.assertEqual(format_cell(0.1), "0.1")
        self.assertEqual(format_cell(True), "true")
        self.assertEqual(format_cell(3), "3")

    def test_jsonl_nulls_non_finite(self) -> None:
        path = write_jsonl(self.root / "t.jsonl", [{"b": float("inf"), "a": 1}])
        self.assertEqual(path.read_text(encoding="utf-8"), '{"a": 1, "b": null}\n')

    def test_print_helpers(self) -> None:
        buffer = io.StringIO()
        with contextlib.redirect_stdout(buffer):
            print_json({"b": 1, "a": 2})
            rows = [{"label": "x", "value": 0.123456, "none": None}]
            print_table(rows, ("label", "value", "none"))
        text = buffer.getvalue()
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertIn("0.1235", text)
        self.assertIn("NA", text)


class TestMainExitCodes(TempDirTestCase):
    def test_no_command_prints_help(self) -> None:
        code, out = _run([])
        self.assertEqual(code, 2)
        self.assertIn("benchmark", out)

    def test_module_entry_point(self) -> None:
        buffer = io.StringIO()
        with contextlib.redirect_stdout(buffer):
            self.assertEqual(module_main([]), 2)

    def test_argparse_errors_exit_two(self) -> None:
        for argv in (["nonsense"], ["benchmark", "--seed", str(2**64)], ["aar", "--threads", "0"]):
            with self.subTest(argv=argv):
                with contextlib.redirect_stderr(io.StringIO()):
                    with self.assertRaises(SystemExit) as caught:
                        main(argv)
                self.assertEqual(caught.exception.code, 2)

    def test_parser_has_every_command(self) -> None:
        parser = create_parser()
        args = parser.parse_args(["mst-sim", "--dry-run", "-o", "x"])
        self.assertEqual((args.command, args.dry_run, args.out), ("mst-sim", True, "x"))

    def test_config_errors_exit_two(self) -> None:
        bad = self.write_config('command = "benchmark"\n[benchmark]\ndims = []\n')
        self.assertEqual(_run(["benchmark", "--config", bad])[0], 2)
        self.assertEqual(_run(["benchmark", "--config", str(self.root / "missing.toml")])[0], 2)
        aar = self.write_config(AAR_TOML, "aar.toml")
        self.assertEqual(_run(["benchmark", "--config", aar])[0], 2)

    def test_dry_run_writes_nothing(self) -> None:
        path = self.write_config(BENCHMARK_TOML)
        out_dir = self.root / "out"
        code, out = _run(["benchmark", "--config", path, "--dry-run", "-o", str(out_dir)])
        self.assertEqual(code, 0)
        self.assertIn('"command": "benchmark"', out)
        self.assertIn("6 cells", out)
        self.assertFalse(out_dir.exists())

    def test_verbose_sets_runtime_log_level(self) -> None:
        path = self.write_config(BENCHMARK_TOML)
        code, _ = _run(["benchmark", "--config", path, "--dry-run", "--verbose"])
        self.assertEqual(code, 0)
        self.assertEqual(get_runtime_config("log_level"), "DEBUG")

    def test_all_cells_failing_exits_three(self) -> None:
        path = self.write_config(
            """
            command = "benchmark"
            n_iter = 20
            burn_in = 5
            [benchmark]
            dims = [2]
            scenario = ["I"]
            samplers = ["MH1"]
            lambda = -2.0
            """
        )
        out_dir = self.root / "failed"
        code, _ = _run(["benchmark", "--config", path, "-o", str(out_dir), "--no-progress"])
        self.assertEqual(code, 3)
        rows = _read_csv(out_dir / "results.csv")
        self.assertEqual(rows[0]["status"], "error:LambdaTooSmallError")
        self.assertEqual(rows[0]["mean_ess"], MISSING)


class TestCommands(TempDirTestCase):
    def _command(self, text: str, command: str, *extra: str) -> Path:
        path = self.write_config(text, f"{command}.toml")
        out_dir = self.root / f"{command}-{len(list(self.root.iterdir()))}"
        code, _ = _run([command, "--config", path, "-o", str(out_dir), "--no-progress", *extra])
        self.assertEqual(code, 0)
        return out_dir

    def test_benchmark_outputs(self) -> None:
        out_dir = self._command(BENCHMARK_TOML, "benchmark")
        rows = _read_csv(out_dir / "results.csv")
        self.assertEqual(len(rows), 6)
        self.assertEqual(tuple(rows[0]), RESULTS_COLUMNS)
        self.assertEqual({r["sampler"] for r in rows}, {"GS", "HR", "MH2(3)"})
        self.assertTrue(all(r["status"] == "ok" for r in rows))
        self.assertTrue(all(float(r["wall_s"]) >= 0 for r in rows))
        traces = (out_dir / "traces.jsonl").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(traces), 6 * 30)
        first = json.loads(traces[0])
        self.assertEqual(sorted(first["values"]), ["sigma_11", "sigma_12", "sigma_22"])
        manifest = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
        self.assertEqual(manifest["command"], "benchmark")
        self.assertEqual(manifest["seeds"]["seed"], 7)
        self.assertIn("results.csv", manifest["files"])

    def test_partial_failure_keeps_going(self) -> None:
        text = BENCHMARK_TOML.replace('["GS", "HR", "MH2(3)"]', '["GS", "MH1"]').replace(
            "lambda = 1.5", "lambda = -2.0"
        )
        out_dir = self._command(text, "benchmark")
        rows = _read_csv(out_dir / "results.csv")
        statuses = {r["sampler"]: r["status"] for r in rows}
        self.assertEqual(statuses["GS"], "ok")
        self.assertEqual(statuses["MH1"], "error:LambdaTooSmallError")

    def test_no_timings_reruns_are_byte_identical(self) -> None:
        path = self.write_config(BENCHMARK_TOML)
        out_dir = self.root / "same"
        snapshots = []
        for _ in range(2):
            code, _ = _run(
                ["benchmark", "--config", path, "-o", str(out_dir), "--no-timings", "--no-progress"]
            )
            self.assertEqual(code, 0)
            snapshots.append({p.name: p.read_bytes() for p in sorted(out_dir.iterdir())})
        self.assertEqual(snapshots[0], snapshots[1])
        rows = _read_csv(out_dir / "results.csv")
        self.assertTrue(all(r["wall_s"] == MISSING and r["ess_per_sec"] == MISSING for r in rows))

    def test_thread_count_does_not_change_results(self) -> None:
        path = self.write_config(BENCHMARK_TOML)
        tables = []
        for threads in ("1", "3"):
            out_dir = self.root / f"threads-{threads}"
            argv = ["benchmark", "--config", path, "-o", str(out_dir), "--no-timings"]
            code, _ = _run(argv + ["--no-progress", "--threads", threads])
            self.assertEqual(code, 0)
            tables.append((out_dir / "results.csv").read_bytes())
        self.assertEqual(tables[0], tables[1])

    def test_aar_outputs(self) -> None:
        rows = _read_csv(self._command(AAR_TOML, "aar") / "aar.csv")
        self.assertEqual(tuple(rows[0]), AAR_COLUMNS)
        self.assertEqual([r["psi"] for r in rows], ["1.0", "4.0"])
        self.assertTrue(all(0.0 <= float(r["aar"]) <= 2.0 for r in rows))

    def test_pggm_outputs(self) -> None:
        out_dir = self._command(PGGM_TOML, "pggm-sim")
        ess_rows = _read_csv(out_dir / "pggm_ess.csv")
        self.assertEqual(tuple(ess_rows[0]), PGGM_ESS_COLUMNS)
        self.assertEqual([r["scheme"] for r in ess_rows], ["GS", "MI"])
        mse_rows = _read_csv(out_dir / "pggm_mse.csv")
        self.assertEqual(sorted({r["iteration"] for r in mse_rows}), ["10", "15"])
        self.assertTrue((out_dir / "traces.jsonl").exists())

    def test_mst_outputs(self) -> None:
        out_dir = self._command(MST_TOML, "mst-sim")
        loss_rows = _read_csv(out_dir / "mst_loss.csv")
        self.assertEqual([r["model"] for r in loss_rows], ["MST", "MT"])
        self.assertTrue(all(float(r["loss"]) > 0 for r in loss_rows))
        ess_rows = _read_csv(out_dir / "mst_ess.csv")
        self.assertEqual(tuple(ess_rows[0]), MST_ESS_COLUMNS)
        self.assertEqual(ess_rows[1]["ess_b"], MISSING)


if __name__ == "__main__":
    unittest.main()
