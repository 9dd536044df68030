#!/usr/bin/env python3
"""
Console output helpers for the MGIG Lab command line.

Status lines go to stdout with colorama colours; diagnostics go through
:mod:`logging` instead.
"""
import json
import logging
from typing import Any, Mapping, Sequence

from colorama import Fore, Style

logger = logging.getLogger(__name__)


def print_header(title: str) -> None:
    """Print a formatted header with the given title.

    Args:
        title: The text to display in the header
    """
    print(f"\n{Fore.CYAN}=== {title} ==={Style.RESET_ALL}\n")


def print_success(message: str) -> None:
    """Print a success message with a green checkmark."""
    print(f"{Fore.GREEN}✓ {message}{Style.RESET_ALL}")


def print_error(message: str) -> None:
    """Print an error message with a red X."""
    print(f"{Fore.RED}✗ {message}{Style.RESET_ALL}")


def print_warning(message: str) -> None:
    print(f"{Fore.YELLOW}⚠ {message}{Style.RESET_ALL}")


def print_info(message: str) -> None:
    print(f"{Fore.BLUE}ℹ {message}{Style.RESET_ALL}")


def print_json(data: Any) -> None:
    """Print JSON data in a formatted, readable way.

    Args:
        data: The data structure to format and print as JSON
    """
    print(json.dumps(data, indent=2, sort_keys=True, default=str))


def print_table(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> None:
    """Aligned plain-text table of the given columns."""
    cells = [[_short(row.get(c)) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    print("  ".join(f"{Style.BRIGHT}{c:<{w}}{Style.RESET_ALL}" for c, w in zip(columns, widths)))
    for row in cells:
        print("  ".join(f"{v:<{w}}" for v, w in zip(row, widths)))


def _short(value: Any) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)
