"""Deterministic JSON and CSV emission for experiment reports.

Identical inputs (seed included) produce byte-identical files: keys are
sorted, floats go through repr, complex values become {"re":, "im":}
objects (or re/im column pairs in CSV), and no wall-clock data enters a
report body.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np


def jsonable(obj: Any) -> Any:
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.complexfloating,)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    return obj


def dump_json(obj: Any, path: str | Path | None = None) -> str:
    text = json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _flatten_cell(value: Any) -> list[tuple[str, Any]]:
    if isinstance(value, (complex, np.complexfloating)):
        return [("re", repr(float(value.real))), ("im", repr(float(value.imag)))]
    if isinstance(value, (float, np.floating)):
        return [("", repr(float(value)))]
    if isinstance(value, (int, np.integer)):
        return [("", int(value))]
    return [("", value)]


def dump_csv(rows: list[dict], path: str | Path | None = None) -> str:
    """Rows of dicts to CSV; complex cells split into _re/_im columns."""
    buf = io.StringIO()
    if rows:
        header: list[str] = []
        flat_rows = []
        for row in rows:
            flat = {}
            for key, value in row.items():
                for suffix, cell in _flatten_cell(value):
                    col = f"{key}_{suffix}" if suffix else key
                    flat[col] = cell
                    if col not in header:
                        header.append(col)
            flat_rows.append(flat)
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        for flat in flat_rows:
            writer.writerow(flat)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
