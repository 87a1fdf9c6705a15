"""Deterministic CSV/JSON serialization for CLI reports.

Both formats round-trip doubles exactly: CSV prints 17 significant digits
with a '.' decimal regardless of locale, JSON uses the shortest repr that
survives float() and carries a schema version key so downstream consumers
can detect layout changes.  Identical inputs produce byte-identical bytes;
nothing here writes timestamps or environment details.
"""

from __future__ import annotations

import json
import math

import numpy as np

SCHEMA = "hoeffding-lab/1"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


def _csv_cell(v) -> str:
    s = format_value(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def table_to_csv(columns: list[str], rows) -> str:
    """Rows are sequences aligned with `columns`."""
    lines = [",".join(_csv_cell(c) for c in columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def grid_to_rows(xs, ys, values) -> tuple[list[str], list]:
    """Flatten a 2-D field into (x, y, value) rows, x-major."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    vals = np.asarray(values)
    rows = []
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            rows.append((float(x), float(y), vals[i, j]))
    return ["x", "y", "value"], rows


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        # JSON has no inf/nan literals; encode as strings rather than crash
        return f if math.isfinite(f) else format_value(f)
    if isinstance(v, complex):
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def payload_to_json(payload: dict) -> str:
    """Versioned deterministic JSON document (insertion-ordered keys)."""
    doc = {"schema": SCHEMA}
    doc.update(payload)
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def table_to_json(kind: str, meta: dict, columns: list[str], rows) -> str:
    body = [dict(zip(columns, row)) for row in rows]
    payload = {"kind": kind}
    payload.update(meta)
    payload["rows"] = body
    return payload_to_json(payload)


def write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        import sys
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
