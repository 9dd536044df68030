"""
Result writers: fixed-column CSV tables, JSON-lines traces and run manifests.

Everything written here is a pure function of its inputs. Floats use
``repr`` so reruns with the same config and seed produce identical bytes;
missing values (including suppressed timings) are written as ``NA``.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from mgig_lab.config import RESULTS_SCHEMA_VERSION, get_system_info

logger = logging.getLogger(__name__)

MISSING = "NA"


def format_cell(value: Any) -> str:
    """Render one CSV cell."""
    if value is None:
        return MISSING
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return MISSING
        return repr(value)
    return str(value)


def write_csv(
    path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]
) -> Path:
    """
    Write rows under a fixed header, in the given column order.

    Raises:
        KeyError: If a row lacks one of the columns
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([format_cell(row[column]) for column in columns])
            count += 1
    logger.debug("Wrote %d rows to %s", count, path)
    return path


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_jsonl(path: Path, records: Iterable[Mapping[str, Any]]) -> Path:
    """One JSON object per line with sorted keys; non-finite floats become null."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(_json_safe(dict(record)), sort_keys=True))
            handle.write("\n")
    return path


def build_manifest(
    command: str,
    config: Mapping[str, Any],
    seeds: Mapping[str, Any],
    files: Sequence[str],
    cells: Optional[List[Dict[str, Any]]] = None,
) -> Dict[str, Any]:
    """
    Everything needed to rerun a command: the resolved config, the seed plan,
    library versions and the files produced. No timestamps.
    """
    return {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "command": command,
        "config": dict(config),
        "seeds": dict(seeds),
        "system": get_system_info(),
        "files": sorted(files),
        "cells": cells or [],
    }


def write_manifest(path: Path, manifest: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_json_safe(dict(manifest)), sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    return path
