"""
Artifact writers: the per-step CSV table and the sorted JSON documents.

Floats are written with repr so every value round-trips exactly, and line
endings are LF on every platform, which keeps reruns byte-identical.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Sequence

from tools.analysis.records import CSV_COLUMNS, RunRecord

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_table(records: Sequence[RunRecord]) -> str:
    """Render the header and one row per record"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow([_cell(value) for value in record.as_row()])
    return buffer.getvalue()


def write_table(records: Sequence[RunRecord], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(emit_table(records))
    logger.info(f"💾 Saved: {path.name} ({len(records)} rows)")
    return path


def json_safe(value: Any) -> Any:
    """Replace non-finite floats by None so the document stays strict JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def emit_json(document: dict) -> str:
    return json.dumps(json_safe(document), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(document: dict, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(emit_json(document))
    logger.info(f"📋 Saved: {path.name}")
    return path
