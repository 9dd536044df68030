"""
Command line interface for MGIG Lab. 🎯
"""

from typing import List

from mgig_lab.cli.commands import create_parser, handle_experiment, main
from mgig_lab.cli.settings import (
    ExperimentConfig,
    load_config,
    parse_config,
    serialize_config,
)

__all__: List[str] = [
    "ExperimentConfig",
    "create_parser",
    "handle_experiment",
    "load_config",
    "main",
    "parse_config",
    "serialize_config",
]
