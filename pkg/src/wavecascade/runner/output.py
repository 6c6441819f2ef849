"""CSV table and JSON metadata sidecar."""

from __future__ import annotations

import json
from pathlib import Path

from .scan import COLUMNS, ScanResult


def format_float(x: float) -> str:
    return "%.17g" % x


def csv_text(result: ScanResult) -> str:
    lines = [",".join(COLUMNS)]
    for row in result.rows:
        lines.append(",".join(format_float(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_output(result: ScanResult, csv_path, json_path=None) -> None:
    """Write the CSV table (and the JSON sidecar when ``json_path`` is given)."""
    Path(csv_path).write_text(csv_text(result))
    if json_path is not None:
        meta = dict(result.metadata)
        meta.setdefault("normalization", result.normalization)
        Path(json_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
