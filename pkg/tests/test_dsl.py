import numpy as np
import pytest

from quartit.dsl import PulseSyntaxError, format_sequence, parse, parse_blocks
from quartit.pulses import PulseSequence, hard, selective


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_selective_statements():
    seq = parse("X(0,1,pi)\nY(1,2,-pi/2)\nZ(2,3,0.25pi)\n")
    assert len(seq) == 3
    assert seq.pulses[0] == selective("X", 0, 1, np.pi)
    assert seq.pulses[1] == selective("Y", 1, 2, -np.pi / 2)
    assert seq.pulses[2].angle == pytest.approx(0.25 * np.pi)
    assert seq.global_phase == 1.0


def test_parse_hard_and_phase():
    seq = parse("PHASE -i\nHARD X(pi)\n")
    assert seq.global_phase == -1j
    assert seq.pulses == (hard("X", np.pi),)


def test_parse_phase_forms():
    assert parse("PHASE 1\nX(0,1,pi)").global_phase == 1.0
    assert parse("PHASE -1\nX(0,1,pi)").global_phase == -1.0
    assert parse("PHASE i\nX(0,1,pi)").global_phase == 1j
    got = parse("PHASE exp(i*pi/4)\nX(0,1,pi)").global_phase
    assert got == pytest.approx(np.exp(1j * np.pi / 4))


def test_parse_decimal_and_negative_angles():
    seq = parse("X(0,1,1.5)\nY(0,2,-0.75)\n")
    assert seq.pulses[0].angle == 1.5
    assert seq.pulses[1].angle == -0.75


def test_comments_and_blank_lines_ignored():
    text = """
# preamble comment
X(0,1,pi)   # trailing comment

Y(2,3,pi/2)
"""
    seq = parse(text)
    assert len(seq) == 2


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("X(0,1)", 1, "got 2 argument"),
        ("X(0,5,pi)", 1, "level"),
        ("X(1,0,pi)", 1, "level"),
        ("W(0,1,pi)", 1, "unknown"),
        ("HARD Z(pi)", 1, "hard"),
        ("X(0,1,pi) junk", 1, "unexpected text"),
        ("X(0,1,pie)", 1, "angle"),
        ("PHASE 2", 1, "phase"),
        ("X(0,1,pi)\nPHASE i\nPHASE i", 3, "phase"),
        ("X(0,1,pi\n", 1, ")"),
    ],
)
def test_parse_errors_carry_position(text, line, fragment):
    with pytest.raises(PulseSyntaxError) as err:
        parse(text)
    assert err.value.line == line
    assert fragment.lower() in str(err.value).lower()
    assert f"line {line}" in str(err.value)
    assert err.value.column >= 1


def test_parse_blocks_split_on_blank_lines():
    text = """# first rotation
X(0,1,pi/2)
X(2,3,pi/2)

# second rotation
Y(0,1,pi/2)

# trailing comment only, no pulses
"""
    blocks = parse_blocks(text)
    assert len(blocks) == 2
    assert len(blocks[0]) == 2
    assert len(blocks[1]) == 1


def test_parse_blocks_empty_input():
    assert parse_blocks("") == []
    assert parse_blocks("# only a comment\n") == []


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def test_format_nice_angles():
    seq = PulseSequence(
        (
            selective("X", 0, 1, np.pi),
            selective("Y", 1, 2, -np.pi / 2),
            selective("Z", 2, 3, np.pi / 3),
        )
    )
    text = format_sequence(seq)
    assert "X(0,1,pi)" in text
    assert "Y(1,2,-pi/2)" in text
    assert "Z(2,3,pi/3)" in text


def test_format_includes_phase_line_first():
    seq = PulseSequence((selective("X", 0, 1, np.pi),), global_phase=-1j)
    lines = format_sequence(seq).splitlines()
    assert lines[0] == "PHASE -i"


def test_round_trip_random_sequences():
    rng = np.random.default_rng(61)
    pairs = [(n, m) for n in range(4) for m in range(n + 1, 4)]
    phases = [1.0, -1.0, 1j, -1j]
    for _ in range(200):
        pulses = []
        for _ in range(rng.integers(1, 6)):
            kind = rng.uniform()
            angle = float(rng.uniform(-2 * np.pi, 2 * np.pi))
            if kind < 0.2:
                pulses.append(hard(("X", "Y")[rng.integers(2)], angle))
            else:
                axis = ("X", "Y", "Z")[rng.integers(3)]
                pulses.append(selective(axis, *pairs[rng.integers(len(pairs))], angle))
        seq = PulseSequence(tuple(pulses), global_phase=phases[rng.integers(4)])
        again = parse(format_sequence(seq))
        assert again.pulses == seq.pulses
        assert again.global_phase == pytest.approx(seq.global_phase, abs=1e-15)


def test_round_trip_special_angles():
    for angle in (np.pi, -np.pi, np.pi / 2, np.pi / 6, 2 * np.pi, 0.123456789, 1e-9):
        seq = PulseSequence((selective("X", 0, 1, angle),))
        again = parse(format_sequence(seq))
        assert again.pulses[0].angle == angle
