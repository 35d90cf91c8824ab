"""Report rendering: delimited text and JSON, byte-stable across runs.

Tabular reports are tab-separated with '# key = value' parameter lines
before the column header; structured reports are sorted-key JSON of the
same content.  Neither embeds timestamps, so identical inputs produce
identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Table", "parse_table", "render_json", "render_table"]

FORMATS = ("tabular", "structured")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):  # includes numpy scalars, hence the cast
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(float(value))
    return str(value)


@dataclass(frozen=True)
class Table:
    params: dict
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


def render_table(params: dict, columns, rows) -> str:
    lines = [f"# {key} = {_fmt(value)}" for key, value in params.items()]
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_safe(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def render_json(params: dict, columns, rows) -> str:
    payload = {
        "params": {k: _json_safe(v) for k, v in params.items()},
        "columns": list(columns),
        "rows": [[_json_safe(v) for v in row] for row in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render(params: dict, columns, rows, fmt: str = "tabular") -> str:
    if fmt == "tabular":
        return render_table(params, columns, rows)
    if fmt == "structured":
        return render_json(params, columns, rows)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def _parse_cell(cell: str):
    if cell == "true":
        return True
    if cell == "false":
        return False
    try:
        return float(cell)
    except ValueError:
        return cell


def parse_table(text: str) -> Table:
    """Read back a tabular report (used by the decay-fit command)."""
    params: dict = {}
    columns: tuple[str, ...] | None = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            body = line.lstrip()[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                params[key.strip()] = _parse_cell(value.strip())
            continue
        cells = line.split("\t")
        if columns is None:
            columns = tuple(cells)
            continue
        if len(cells) != len(columns):
            raise ValueError(
                f"line {lineno}: expected {len(columns)} columns, got {len(cells)}"
            )
        rows.append(tuple(_parse_cell(c) for c in cells))
    if columns is None:
        raise ValueError("no column header found")
    return Table(params=params, columns=columns, rows=tuple(rows))
