"""CSV / JSON serialization with fixed 12-significant-digit floats."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping, Sequence

SIG_DIGITS = 12


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) or hasattr(value, "dtype"):
        return f"{float(value):.{SIG_DIGITS}g}"
    return str(value)


def _round(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, Mapping):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    if isinstance(value, int):
        return value
    if isinstance(value, float) or hasattr(value, "dtype"):
        x = float(value)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}")
    return value


def to_csv(meta: Mapping[str, Any], columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    """Comma-separated table preceded by ``# key=value`` metadata lines."""
    buf = io.StringIO()
    for key, value in _flatten(meta):
        buf.write(f"# {key}={fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_json(meta: Mapping[str, Any], rows: Iterable[Mapping[str, Any]]) -> str:
    doc = dict(_round(meta))
    doc["records"] = [_round(r) for r in rows]
    return json.dumps(doc, indent=2) + "\n"


def _flatten(meta: Mapping[str, Any], prefix: str = ""):
    for key, value in meta.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            yield from _flatten(value, prefix=f"{name}.")
        else:
            yield name, value
