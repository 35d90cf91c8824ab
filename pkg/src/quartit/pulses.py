"""Selective and hard rf pulses, and compilation of pulse sequences.

A selective pulse addresses one pair of levels (n, m) and rotates that 2x2
subspace with the half-angle convention, leaving the other levels untouched:

    X(theta): [[cos t/2, -i sin t/2], [-i sin t/2, cos t/2]]
    Y(theta): [[cos t/2,   -sin t/2], [   sin t/2, cos t/2]]
    Z(theta): diag(e^{-i t/2}, e^{+i t/2})

Z pulses are frame rotations rather than rf drive; they are legal in
sequences and tagged "non-rf" in verification reports.  A hard pulse drives
the whole spin, U = exp(-i theta I_a) with a in {X, Y}.

Sequences are stored in temporal order: pulses[0] acts first.  A compiled
sequence is therefore global_phase * U_k ... U_1, matching the usual
right-to-left operator product notation when a sequence is read off a
product expression.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import DIM, check_density, check_state, check_unitary, spin_operators

__all__ = [
    "Pulse",
    "PulseSequence",
    "apply",
    "apply_state",
    "compile_sequence",
    "hard",
    "pulse_unitary",
    "selective",
]

_AXES = ("X", "Y", "Z")
_HARD_AXES = ("X", "Y")
_PAIRS = tuple((n, m) for n in range(DIM) for m in range(n + 1, DIM))


@dataclass(frozen=True)
class Pulse:
    """One rotation: selective on a level pair, or hard on the whole spin.

    pair is None for hard pulses.  photon_number (m - n) distinguishes one-,
    two- and three-photon selective transitions.
    """

    axis: str
    angle: float
    pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.pair is None:
            if self.axis not in _HARD_AXES:
                raise ValueError(
                    f"hard pulse axis must be X or Y, got {self.axis!r}"
                )
        else:
            if self.axis not in _AXES:
                raise ValueError(f"pulse axis must be one of {_AXES}, got {self.axis!r}")
            if tuple(self.pair) not in _PAIRS:
                raise ValueError(
                    f"pair must be (n, m) with 0 <= n < m <= {DIM - 1}, got {self.pair}"
                )
            object.__setattr__(self, "pair", tuple(self.pair))
        if not np.isfinite(self.angle):
            raise ValueError(f"angle must be finite, got {self.angle}")
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def is_hard(self) -> bool:
        return self.pair is None

    @property
    def photon_number(self) -> int | None:
        """Level distance m - n of a selective pulse (1, 2 or 3); None if hard."""
        if self.pair is None:
            return None
        return self.pair[1] - self.pair[0]

    @property
    def is_rf(self) -> bool:
        """Z rotations are bookkeeping frame changes, not rf drive."""
        return self.is_hard or self.axis != "Z"

    def label(self) -> str:
        if self.is_hard:
            return f"HARD {self.axis}({self.angle:g})"
        n, m = self.pair
        return f"{self.axis}_{n}{m}({self.angle:g})"


def selective(axis: str, n: int, m: int, angle: float) -> Pulse:
    return Pulse(axis=axis, angle=angle, pair=(n, m))


def hard(axis: str, angle: float) -> Pulse:
    return Pulse(axis=axis, angle=angle, pair=None)


@dataclass(frozen=True)
class PulseSequence:
    """Pulses in temporal order plus an overall phase factor."""

    pulses: tuple[Pulse, ...] = ()
    global_phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        phase = complex(self.global_phase)
        if abs(abs(phase) - 1.0) > 1e-12:
            raise ValueError(f"global phase must have unit modulus, got |{phase}|")
        object.__setattr__(self, "global_phase", phase)

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def rf_pulse_count(self) -> int:
        return sum(1 for p in self.pulses if p.is_rf)

    @property
    def frame_rotation_count(self) -> int:
        return len(self.pulses) - self.rf_pulse_count


def pulse_unitary(pulse: Pulse) -> np.ndarray:
    """The 4x4 unitary of a single pulse."""
    theta = pulse.angle
    if pulse.is_hard:
        ix, iy, _ = spin_operators()
        gen = ix if pulse.axis == "X" else iy
        return scipy.linalg.expm(-1j * theta * gen)
    u = np.eye(DIM, dtype=complex)
    n, m = pulse.pair
    half = theta / 2
    c, s = np.cos(half), np.sin(half)
    if pulse.axis == "X":
        block = np.array([[c, -1j * s], [-1j * s, c]])
    elif pulse.axis == "Y":
        block = np.array([[c, -s], [s, c]])
    else:
        block = np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])
    u[np.ix_([n, m], [n, m])] = block
    return u


def compile_sequence(sequence: PulseSequence) -> np.ndarray:
    """Compile a sequence to its 4x4 unitary (empty sequence -> identity).

    The result is checked unitary to 1e-12; pulse counts here are far too
    small for the product to drift past that.
    """
    u = np.eye(DIM, dtype=complex)
    for pulse in sequence.pulses:
        u = pulse_unitary(pulse) @ u
    u = sequence.global_phase * u
    return check_unitary(u, name="compiled sequence")


def apply(u, rho) -> np.ndarray:
    """Conjugate a density matrix: U rho U^dag."""
    uu = check_unitary(u, atol=1e-9, name="u")
    r = check_density(rho)
    return uu @ r @ uu.conj().T


def apply_state(u, psi) -> np.ndarray:
    """Apply a unitary to a normalized state vector."""
    uu = check_unitary(u, atol=1e-9, name="u")
    p = check_state(psi)
    return uu @ p
