"""
CLI command implementations for MGIG Lab. ⚙️
╔═══════════════════════════════════════════════════════════╗
║ benchmark · aar · pggm-sim · mst-sim                      ║
╚═══════════════════════════════════════════════════════════╝

Every command reads a TOML config (``--config``), applies flag overrides,
validates, then either prints the resolved config (``--dry-run``) or runs the
experiment grid and writes its tables and manifest to the output directory.
"""

import argparse
import logging
import textwrap
from pathlib import Path
from typing import List, Optional

from colorama import init as colorama_init

from mgig_lab.cli.experiments import RUNNERS, count_cells
from mgig_lab.cli.settings import (
    COMMANDS,
    ExperimentConfig,
    apply_overrides,
    config_to_dict,
    load_config,
    validate_config,
)
from mgig_lab.config import (
    CLI_NAME,
    get_config_summary,
    get_runtime_config,
    get_version_string,
    update_runtime_config,
)
from mgig_lab.core.exceptions import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_RUNTIME_FAILURE,
    MgigError,
    get_exit_code,
)
from mgig_lab.helpers.common import (
    print_error,
    print_header,
    print_info,
    print_json,
    print_success,
    print_table,
    print_warning,
)

logger = logging.getLogger(__name__)

_HELP = {
    "benchmark": "ESS, ESS/sec and acceptance rate of the MGIG samplers",
    "aar": "average acceptance rate of the Wishart-proposal sampler over a λ × ψ grid",
    "pggm-sim": "partial Gaussian graphical model study over Ω_y update schemes",
    "mst-sim": "matrix skew-t study: predictive loss and ESS per W update",
}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def create_parser() -> argparse.ArgumentParser:
    """
    Build the ``mgig-lab`` parser with one subcommand per experiment.

    Returns:
        argparse.ArgumentParser: Configured argument parser
    """
    parser = argparse.ArgumentParser(
        prog=CLI_NAME,
        description=textwrap.dedent(
            """
            ┏━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━┓
            ┃ MGIG Lab - MCMC for matrix GIG distributions ┃
            ┗━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━┛
            Config-driven sampler benchmarks and model studies.
            """
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version=f"MGIG Lab v{get_version_string()}"
    )
    subparsers = parser.add_subparsers(dest="command", help="Experiment to run")

    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=_HELP[command])
        sub.add_argument("--config", "-c", type=Path, help="TOML experiment config")
        sub.add_argument("--out", "-o", help="Output directory (overrides output_dir)")
        sub.add_argument("--seed", type=_seed, help="Master seed (overrides seed)")
        sub.add_argument("--threads", type=_positive, help="Worker threads")
        sub.add_argument(
            "--dry-run", action="store_true", help="Validate and print the config only"
        )
        sub.add_argument(
            "--no-timings",
            action="store_true",
            help="Write NA for wall-clock columns so reruns are byte-identical",
        )
        sub.add_argument(
            "--no-progress", action="store_true", help="Hide the progress bar"
        )
        sub.add_argument(
            "--verbose", "-v", action="store_true", help="Enable debug logging"
        )

    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """File values, then flag overrides; defaults fill the rest."""
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig(command=args.command)
        validate_config(cfg)
    return apply_overrides(
        cfg,
        command=args.command,
        seed=args.seed,
        output_dir=args.out,
        threads=args.threads,
    )


def handle_experiment(args: argparse.Namespace) -> int:
    """
    Run one experiment command.

    Returns:
        0 on success, 2 on a config error, 3 when every cell failed
    """
    if args.no_progress:
        update_runtime_config("progress", False)
    if args.threads is not None:
        update_runtime_config("threads", args.threads)

    try:
        cfg = resolve_config(args)
    except MgigError as exc:
        print_error(f"Invalid configuration: {exc}")
        return get_exit_code(exc)
    logger.debug("Runtime config: %s", get_config_summary())

    if args.dry_run:
        print_header(f"{CLI_NAME} {cfg.command} (dry run)")
        print_json(config_to_dict(cfg))
        print_info(f"{count_cells(cfg)} cells would be written to {cfg.output_dir}")
        return EXIT_OK

    print_header(f"{CLI_NAME} {cfg.command}")
    print_info(f"{count_cells(cfg)} cells, seed {cfg.seed}, output {cfg.output_dir}")
    try:
        result = RUNNERS[cfg.command](cfg, not args.no_timings)
    except MgigError as exc:
        print_error(f"{cfg.command} failed: {exc}")
        return get_exit_code(exc)
    except OSError as exc:
        print_error(f"Cannot write results: {exc}")
        return EXIT_RUNTIME_FAILURE

    if result.all_failed:
        print_error(f"All {result.n_cells} cells failed; see the status column")
        return EXIT_RUNTIME_FAILURE
    if result.n_failed:
        print_warning(f"{result.n_failed} of {result.n_cells} cells failed")
        print_table(result.failed, ("index", "label", "status"))
    print_success(f"Wrote {', '.join(result.files)} to {result.output_dir}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Console entry point.

    Args:
        argv: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = create_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG_ERROR

    colorama_init()
    if args.verbose:
        update_runtime_config("log_level", "DEBUG")
    level = getattr(logging, get_runtime_config("log_level", "INFO"), logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return handle_experiment(args)
