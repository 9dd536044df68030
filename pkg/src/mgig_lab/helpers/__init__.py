"""
Console helpers shared by the CLI commands.
"""

from typing import List

from mgig_lab.helpers.common import (
    print_error,
    print_header,
    print_info,
    print_json,
    print_success,
    print_table,
    print_warning,
)

__all__: List[str] = [
    "print_error",
    "print_header",
    "print_info",
    "print_json",
    "print_success",
    "print_table",
    "print_warning",
]
