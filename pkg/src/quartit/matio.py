"""Plain-text exchange format for small complex matrices.

One matrix row per line, entries as "(re, im)" pairs separated by
whitespace, '#' starting a comment.  Floats are written with shortest
round-trip precision so a write/parse cycle is exact and byte-stable.
"""

from __future__ import annotations

import re

import numpy as np

__all__ = ["format_matrix", "parse_matrix", "read_matrix", "write_matrix"]

_ENTRY_RE = re.compile(
    r"\(\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*,"
    r"\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*\)"
)


def format_matrix(matrix, comments=()) -> str:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    lines = [f"# {c}" for c in comments]
    for row in m:
        entries = (complex(z) for z in row)
        lines.append(" ".join(f"({z.real!r}, {z.imag!r})" for z in entries))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        entries = _ENTRY_RE.findall(line)
        leftover = _ENTRY_RE.sub("", line).strip()
        if leftover or not entries:
            raise ValueError(f"line {lineno}: expected '(re, im)' entries, got {raw!r}")
        if width is None:
            width = len(entries)
        elif len(entries) != width:
            raise ValueError(
                f"line {lineno}: expected {width} entries per row, got {len(entries)}"
            )
        rows.append([complex(float(re_), float(im)) for re_, im in entries])
    if not rows:
        raise ValueError("no matrix rows found")
    return np.array(rows, dtype=complex)


def write_matrix(path, matrix, comments=()) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(matrix, comments))


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return parse_matrix(fh.read())
