#!/usr/bin/env python3
"""
MGIG Lab module execution point: ``python -m mgig_lab``.
"""

import sys
from typing import List, Optional

from mgig_lab.cli.commands import main as cli_main


def main(args: Optional[List[str]] = None) -> int:
    """
    Run the CLI, turning Ctrl-C into exit code 130.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code (0 for success)
    """
    try:
        return cli_main(args)
    except KeyboardInterrupt:
        print("\n🛑 Interrupted.")
        return 130


if __name__ == "__main__":
    sys.exit(main())
