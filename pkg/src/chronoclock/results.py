"""Tabular results and their CSV / JSON serialization.

CSV files start with ``# key: <json>`` metadata lines, then a header row.
Floats are written with 17 significant digits; NaN and infinities are
spelled ``nan``, ``inf`` and ``-inf``. JSON files are a single object
``{"meta": ..., "rows": [...]}`` where NaN becomes ``null`` and infinities
become the strings ``"inf"`` / ``"-inf"``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Any

from .exceptions import IoError

FORMATS = ("csv", "json")


@dataclass
class Results:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.rows = [tuple(r) for r in self.rows]
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} fields, expected {len(self.columns)}")

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _plain(v):
    """numpy scalars to builtins; bool stays bool."""
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, bool):
        return v
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, Real):
        return float(v)
    raise TypeError(f"cannot serialize value of type {type(v).__name__}")


def format_value(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return v


def parse_value(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _json_value(v):
    v = _plain(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _from_json(v):
    if v in ("inf", "-inf"):
        return float(v)
    return v


def _json_meta(meta: dict) -> dict:
    def conv(x):
        if isinstance(x, dict):
            return {str(k): conv(val) for k, val in x.items()}
        if isinstance(x, (list, tuple)):
            return [conv(val) for val in x]
        return _json_value(x)
    return conv(meta)


def to_csv(results: Results) -> str:
    buf = io.StringIO()
    for key in sorted(results.meta):
        buf.write(f"# {key}: {json.dumps(_json_meta({key: results.meta[key]})[key], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(results.columns)
    for r in results.rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()


def to_json(results: Results) -> str:
    doc = {
        "meta": _json_meta(results.meta),
        "rows": [{c: _json_value(v) for c, v in zip(results.columns, r)} for r in results.rows],
        "columns": list(results.columns),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render(results: Results, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(results)
    if fmt == "json":
        return to_json(results)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit(results: Results, path: str | None, fmt: str = "csv") -> str:
    """Write ``results`` to ``path`` (``None`` or ``"-"`` for stdout) and return the text."""
    text = render(results, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return text


def from_csv(text: str) -> Results:
    meta = {}
    lines = text.split("\n")
    i = 0
    while i < len(lines) and lines[i].startswith("# "):
        key, _, val = lines[i][2:].partition(": ")
        meta[key] = json.loads(val)
        i += 1
    reader = csv.reader(io.StringIO("\n".join(lines[i:])))
    try:
        header = next(reader)
    except StopIteration as exc:
        raise IoError("CSV has no header row") from exc
    rows = [tuple(parse_value(x) for x in r) for r in reader if r]
    return Results(tuple(header), rows, meta)


def from_json(text: str) -> Results:
    doc = json.loads(text)
    columns = tuple(doc["columns"])
    rows = [tuple(_from_json(r[c]) for c in columns) for r in doc["rows"]]
    return Results(columns, rows, doc["meta"])


def load(path: str, fmt: str | None = None) -> Results:
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        return from_json(text) if fmt == "json" else from_csv(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise IoError(f"malformed {fmt} file {path}: {exc}") from exc

