"""Plain-text pulse sequence format.

One statement per line, `#` starts a comment, blank lines are ignored
(except that they separate blocks in multi-sequence files):

    # invert qubit B
    PHASE i
    X(2,3,pi)
    X(0,1,pi)
    HARD Y(pi/2)

Statements are `AXIS(n,m,angle)` for selective pulses (AXIS in X/Y/Z,
levels 0 <= n < m <= 3), `HARD AXIS(angle)` for X/Y hard pulses, and an
optional single `PHASE` directive taking 1, -1, i, -i or exp(i*angle).
Angles accept pi, -pi, pi/<int>, <decimal>pi, or plain radians.
Errors carry the line and column of the offending token.
"""

from __future__ import annotations

import cmath
import math
import re

from .core import DIM
from .pulses import Pulse, PulseSequence, hard, selective

__all__ = [
    "PulseSyntaxError",
    "format_sequence",
    "parse",
    "parse_blocks",
]


class PulseSyntaxError(ValueError):
    """Malformed pulse program text; points at line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_ANGLE_RE = re.compile(
    r"""^(?P<sign>-)?(?:
          (?P<pi>pi)(?:/(?P<div>\d+))?
        | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)(?P<numpi>pi)?
        )$""",
    re.VERBOSE,
)


def _parse_angle(token: str, line: int, column: int) -> float:
    text = token.strip()
    column += len(token) - len(token.lstrip())
    m = _ANGLE_RE.match(text)
    if m is None:
        raise PulseSyntaxError(
            f"bad angle {text!r} (expected pi, pi/<int>, <decimal>pi or radians)",
            line,
            column,
        )
    if m.group("pi"):
        value = math.pi
        if m.group("div") is not None:
            div = int(m.group("div"))
            if div == 0:
                raise PulseSyntaxError("pi divisor must be a positive integer", line, column)
            value /= div
    else:
        value = float(m.group("num"))
        if m.group("numpi"):
            value *= math.pi
    return -value if m.group("sign") else value


def _parse_level(token: str, line: int, column: int) -> int:
    text = token.strip()
    column += len(token) - len(token.lstrip())
    if not re.fullmatch(r"-?\d+", text):
        raise PulseSyntaxError(f"level must be an integer, got {text!r}", line, column)
    value = int(text)
    if not 0 <= value <= DIM - 1:
        raise PulseSyntaxError(f"level must be 0..{DIM - 1}, got {value}", line, column)
    return value


def _split_args(inner: str, start_col: int) -> list[tuple[str, int]]:
    parts = []
    offset = 0
    for piece in inner.split(","):
        parts.append((piece, start_col + offset))
        offset += len(piece) + 1
    return parts


def _parse_call(code: str, pos: int, line: int) -> tuple[list[tuple[str, int]], int]:
    """Parse '(arg, ...)' starting at or after pos; returns args and end index."""
    m = re.compile(r"\s*\(").match(code, pos)
    if m is None:
        raise PulseSyntaxError("expected '(' after axis", line, pos + 1)
    open_idx = m.end() - 1
    close_idx = code.find(")", open_idx)
    if close_idx < 0:
        raise PulseSyntaxError("missing ')'", line, len(code) + 1)
    tail = code[close_idx + 1 :]
    if tail.strip():
        bad = close_idx + 1 + (len(tail) - len(tail.lstrip()))
        raise PulseSyntaxError(f"unexpected text {tail.strip()!r} after pulse", line, bad + 1)
    args = _split_args(code[open_idx + 1 : close_idx], open_idx + 2)
    return args, close_idx


_PHASE_LITERALS = {"1": 1 + 0j, "-1": -1 + 0j, "i": 1j, "-i": -1j}
_PHASE_EXP_RE = re.compile(r"^exp\(\s*i\s*\*\s*(?P<angle>[^)]*?)\s*\)$")


def _parse_phase(expr: str, line: int, column: int) -> complex:
    text = expr.strip()
    column += len(expr) - len(expr.lstrip())
    if text in _PHASE_LITERALS:
        return _PHASE_LITERALS[text]
    m = _PHASE_EXP_RE.match(text)
    if m is not None:
        inner_col = column + m.start("angle")
        angle = _parse_angle(m.group("angle"), line, inner_col)
        return cmath.exp(1j * angle)
    raise PulseSyntaxError(
        f"phase must be 1, -1, i, -i or exp(i*angle), got {text!r}", line, column
    )


def _parse_statement(code: str, line: int) -> tuple[str, object]:
    m = re.compile(r"\s*([A-Za-z]+)").match(code)
    if m is None:
        col = len(code) - len(code.lstrip()) + 1
        raise PulseSyntaxError("expected a directive", line, col)
    word = m.group(1)
    word_col = m.start(1) + 1

    if word in ("X", "Y", "Z"):
        args, _ = _parse_call(code, m.end(1), line)
        if len(args) != 3:
            raise PulseSyntaxError(
                f"selective pulse takes (n, m, angle), got {len(args)} argument(s)",
                line,
                args[0][1],
            )
        n = _parse_level(args[0][0], line, args[0][1])
        mm = _parse_level(args[1][0], line, args[1][1])
        if n >= mm:
            raise PulseSyntaxError(f"levels must satisfy n < m, got ({n}, {mm})", line, args[1][1])
        angle = _parse_angle(args[2][0], line, args[2][1])
        return "pulse", selective(word, n, mm, angle)

    if word == "HARD":
        m2 = re.compile(r"\s*([A-Za-z]+)").match(code, m.end(1))
        if m2 is None:
            raise PulseSyntaxError("expected axis after HARD", line, m.end(1) + 1)
        axis = m2.group(1)
        axis_col = m2.start(1) + 1
        if axis not in ("X", "Y"):
            raise PulseSyntaxError(f"hard pulse axis must be X or Y, got {axis!r}", line, axis_col)
        args, _ = _parse_call(code, m2.end(1), line)
        if len(args) != 1:
            raise PulseSyntaxError(
                f"hard pulse takes (angle), got {len(args)} argument(s)", line, args[0][1]
            )
        angle = _parse_angle(args[0][0], line, args[0][1])
        return "pulse", hard(axis, angle)

    if word == "PHASE":
        expr = code[m.end(1) :]
        if not expr.strip():
            raise PulseSyntaxError("PHASE needs a value", line, m.end(1) + 1)
        return "phase", _parse_phase(expr, line, m.end(1) + 1)

    raise PulseSyntaxError(f"unknown directive {word!r}", line, word_col)


def _strip_comment(raw: str) -> str:
    idx = raw.find("#")
    return raw if idx < 0 else raw[:idx]


def _parse_lines(lines: list[tuple[int, str]]) -> PulseSequence:
    pulses: list[Pulse] = []
    phase: complex | None = None
    for line_no, code in lines:
        if not code.strip():
            continue
        kind, value = _parse_statement(code, line_no)
        if kind == "phase":
            if phase is not None:
                col = len(code) - len(code.lstrip()) + 1
                raise PulseSyntaxError("duplicate PHASE directive", line_no, col)
            phase = value
        else:
            pulses.append(value)
    return PulseSequence(tuple(pulses), phase if phase is not None else 1.0 + 0.0j)


def parse(text: str) -> PulseSequence:
    """Parse one pulse program into a PulseSequence."""
    lines = [(i + 1, _strip_comment(raw)) for i, raw in enumerate(text.splitlines())]
    return _parse_lines(lines)


def parse_blocks(text: str) -> list[PulseSequence]:
    """Parse a multi-sequence file; blank lines separate sequences.

    Comment-only lines attach to the surrounding block without separating
    it.  Blocks that contain no pulses are dropped, so an empty (or
    all-comment) file yields an empty list.
    """
    blocks: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []
    for i, raw in enumerate(text.splitlines()):
        if raw.strip() == "":
            if current:
                blocks.append(current)
                current = []
            continue
        current.append((i + 1, _strip_comment(raw)))
    if current:
        blocks.append(current)
    sequences = [_parse_lines(block) for block in blocks]
    return [s for s in sequences if len(s) > 0]


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

_NICE_DIVISORS = (1, 2, 3, 4, 6, 8, 12)


def _format_angle(theta: float) -> str:
    if theta == 0:
        return "0"
    sign = "-" if theta < 0 else ""
    mag = abs(theta)
    for div in _NICE_DIVISORS:
        if mag == math.pi / div:
            return f"{sign}pi" if div == 1 else f"{sign}pi/{div}"
    ratio = mag / math.pi
    short = f"{ratio:.12g}"
    try:
        if float(short) * math.pi == mag:
            return f"{sign}{short}pi"
    except ValueError:  # pragma: no cover - .12g always parses
        pass
    return repr(theta)


def _format_phase(phase: complex) -> str:
    for text, value in _PHASE_LITERALS.items():
        if phase == value:
            return text
    return f"exp(i*{_format_angle(cmath.phase(phase))})"


def format_sequence(sequence: PulseSequence) -> str:
    """Render a PulseSequence as program text; parse() round-trips it."""
    lines = []
    if sequence.global_phase != 1:
        lines.append(f"PHASE {_format_phase(sequence.global_phase)}")
    for p in sequence.pulses:
        if p.is_hard:
            lines.append(f"HARD {p.axis}({_format_angle(p.angle)})")
        else:
            n, m = p.pair
            lines.append(f"{p.axis}({n},{m},{_format_angle(p.angle)})")
    return "\n".join(lines) + "\n"
