"""Core linear algebra for a spin-3/2 nucleus used as a two-qubit register.

The four Zeeman levels are numbered 0..3 in order of descending spin
projection m = 3/2, 1/2, -1/2, -3/2 and carry the logical assignment

    |0> = |00>,  |1> = |01>,  |2> = |10>,  |3> = |11>

with qubit A the most significant bit.  Detection is longitudinal: the
observable is Mz = sum_i m_i rho_ii, so everything downstream reasons about
populations and the unitaries that move them.  This module owns the level
encoding, the collective spin operators, state metrics, the projection onto
physical density matrices, and the equivalence classifier used to compare
compiled pulse sequences against ideal gates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DIM",
    "SPIN",
    "SPIN_PROJECTIONS",
    "Level",
    "LEVELS",
    "bit_pair",
    "level_index",
    "level_label",
    "EquivalenceClass",
    "as_generator",
    "check_density",
    "check_state",
    "check_unitary",
    "equivalence_class",
    "fidelity",
    "frobenius_distance",
    "mz",
    "nearest_physical",
    "random_density",
    "spin_operators",
]

DIM = 4
SPIN = 1.5
# descending m: index i holds projection 3/2 - i
SPIN_PROJECTIONS = (1.5, 0.5, -0.5, -1.5)

DEFAULT_TOLERANCE = 1e-10
UNITARITY_ATOL = 1e-12


@dataclass(frozen=True)
class Level:
    """One register level: basis index, spin projection, and logical bits."""

    index: int
    spin: float
    bits: tuple[int, int]

    @property
    def label(self) -> str:
        return f"|{self.bits[0]}{self.bits[1]}> (m={self.spin:+g})"


def bit_pair(index: int) -> tuple[int, int]:
    """Logical bits (a, b) of basis level ``index``; a is the high bit."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"level index must be 0..3, got {index}")
    return (index >> 1, index & 1)


def level_index(a: int, b: int) -> int:
    """Basis level holding logical state |ab>."""
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"bits must be 0 or 1, got ({a}, {b})")
    return 2 * a + b


def level_label(index: int) -> str:
    return LEVELS[index].label


LEVELS = tuple(Level(i, SPIN_PROJECTIONS[i], bit_pair(i)) for i in range(DIM))


def as_generator(seed) -> np.random.Generator:
    """Return ``seed`` if it is already a Generator, else seed a fresh one."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# operators and validation
# ---------------------------------------------------------------------------

def spin_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective spin-3/2 matrices (Ix, Iy, Iz) in the level basis.

    Built from the ladder elements <m+1|I+|m> = sqrt(I(I+1) - m(m+1)); they
    satisfy [Ix, Iy] = i Iz and Ix^2 + Iy^2 + Iz^2 = (15/4) * identity.
    """
    m = np.array(SPIN_PROJECTIONS)
    iz = np.diag(m).astype(complex)
    iplus = np.zeros((DIM, DIM), dtype=complex)
    for k in range(1, DIM):
        # column k holds m_k; raising lands on row k-1 (higher m)
        iplus[k - 1, k] = np.sqrt(SPIN * (SPIN + 1) - m[k] * (m[k] + 1))
    iminus = iplus.conj().T
    ix = (iplus + iminus) / 2
    iy = (iplus - iminus) / 2j
    return ix, iy, iz


def _as_square(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.shape != (DIM, DIM):
        raise ValueError(f"{name} must be {DIM}x{DIM}, got shape {arr.shape}")
    return arr


def check_unitary(u, atol: float = UNITARITY_ATOL, name: str = "operator") -> np.ndarray:
    """Validate and return ``u`` as a 4x4 unitary ndarray."""
    arr = _as_square(u, name)
    defect = np.max(np.abs(arr.conj().T @ arr - np.eye(DIM)))
    if defect > atol:
        raise ValueError(f"{name} is not unitary (U^dag U deviates by {defect:.3e})")
    return arr


def check_density(rho, atol: float = 1e-8, name: str = "state") -> np.ndarray:
    """Validate and return ``rho`` as a 4x4 density matrix ndarray."""
    arr = _as_square(rho, name)
    if np.max(np.abs(arr - arr.conj().T)) > atol:
        raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(arr).real - 1.0) > atol:
        raise ValueError(f"{name} trace is {np.trace(arr).real:.6f}, expected 1")
    eigs = np.linalg.eigvalsh(arr)
    if eigs.min() < -atol:
        raise ValueError(f"{name} has negative eigenvalue {eigs.min():.3e}")
    return arr


def check_state(psi, atol: float = 1e-8, name: str = "state vector") -> np.ndarray:
    arr = np.asarray(psi, dtype=complex).reshape(-1)
    if arr.shape != (DIM,):
        raise ValueError(f"{name} must have {DIM} amplitudes, got shape {arr.shape}")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"{name} norm is {norm:.6f}, expected 1")
    return arr


# ---------------------------------------------------------------------------
# observables and metrics
# ---------------------------------------------------------------------------

def mz(rho) -> float:
    """Longitudinal magnetization sum_i m_i rho_ii (linear in rho)."""
    arr = _as_square(rho, "rho")
    return float(np.real(np.sum(np.array(SPIN_PROJECTIONS) * np.diag(arr))))


def frobenius_distance(a, b) -> float:
    return float(np.linalg.norm(_as_square(a, "a") - _as_square(b, "b")))


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1]."""
    r = check_density(rho, name="rho")
    s = check_density(sigma, name="sigma")
    w, v = np.linalg.eigh(r)
    sqrt_r = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sqrt_r @ s @ sqrt_r
    eigs = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    f = float(np.sum(np.sqrt(eigs)) ** 2)
    return min(f, 1.0)


def random_density(seed) -> np.ndarray:
    """Random full-rank density matrix G G^dag / tr(G G^dag), G complex Ginibre."""
    rng = as_generator(seed)
    g = rng.standard_normal((DIM, DIM)) + 1j * rng.standard_normal((DIM, DIM))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _project_simplex(v: np.ndarray) -> np.ndarray:
    # Euclidean projection onto {x >= 0, sum x = 1}
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, len(v) + 1)
    support = u - (css - 1.0) / ks > 0
    k = ks[support][-1]
    theta = (css[support][-1] - 1.0) / k
    return np.maximum(v - theta, 0.0)


def nearest_physical(estimate, atol: float = 1e-8) -> np.ndarray:
    """Nearest density matrix to a Hermitian estimate.

    Normalizes the trace to 1, then projects the eigenvalues onto the
    probability simplex in the estimate's own eigenbasis (the Frobenius-
    nearest point of the density-matrix set).  Idempotent on valid states.
    """
    arr = _as_square(estimate, "estimate")
    if np.max(np.abs(arr - arr.conj().T)) > atol:
        raise ValueError("estimate must be Hermitian")
    arr = (arr + arr.conj().T) / 2
    tr = np.trace(arr).real
    if tr <= atol:
        raise ValueError(f"estimate trace {tr:.3e} is not positive")
    arr = arr / tr
    w, v = np.linalg.eigh(arr)
    w = _project_simplex(w)
    return (v * w) @ v.conj().T


# ---------------------------------------------------------------------------
# unitary equivalence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceClass:
    """How a compiled unitary relates to a reference.

    tag is one of 'exact', 'global_phase', 'diagonal_phase', 'sign_flips',
    'mismatch', checked in that order against successively weaker relations.
    residual is the max elementwise deviation after applying the reported
    relation (for 'mismatch', the direct deviation).  phase (radians) is set
    for global_phase, phases (four unit-modulus factors) for diagonal_phase,
    flips (entry positions where U = -V) for sign_flips.
    """

    tag: str
    residual: float
    phase: float | None = None
    phases: tuple[complex, ...] | None = None
    flips: tuple[tuple[int, int], ...] | None = None

    def describe(self) -> str:
        if self.tag == "global_phase":
            return f"global_phase({self.phase:+.6f} rad)"
        if self.tag == "diagonal_phase":
            angles = ", ".join(f"{np.angle(p):+.4f}" for p in self.phases)
            return f"diagonal_phase([{angles}] rad)"
        if self.tag == "sign_flips":
            spots = ", ".join(f"({r},{c})" for r, c in self.flips)
            return f"sign_flips[{spots}]"
        return self.tag


def _wrap_angle(phi: float) -> float:
    # map to (-pi, pi]
    out = (phi + np.pi) % (2 * np.pi) - np.pi
    if out == -np.pi:
        out = np.pi
    return float(out)


def equivalence_class(u, v, tol: float = DEFAULT_TOLERANCE) -> EquivalenceClass:
    """Classify how unitary ``u`` relates to reference unitary ``v``.

    Relations are tried strongest first and the first match wins:

    * exact          max|U - V| <= tol
    * global_phase   U = e^{i phi} V, phi read off the largest entry of V
    * diagonal_phase U = D V for a diagonal unit-modulus D with at least one
                     genuinely complex entry (pure +-1 patterns are reported
                     as sign flips instead, so the Y- and X-variant gates
                     land in distinct classes)
    * sign_flips     U agrees with V entrywise except positions where U = -V
    * mismatch       none of the above

    Raises ValueError if either argument is not unitary.
    """
    uu = check_unitary(u, atol=max(tol, UNITARITY_ATOL), name="u")
    vv = check_unitary(v, atol=max(tol, UNITARITY_ATOL), name="v")

    direct = float(np.max(np.abs(uu - vv)))
    if direct <= tol:
        return EquivalenceClass("exact", direct)

    # global phase from the largest-magnitude entry of V (never near zero)
    r, c = np.unravel_index(np.argmax(np.abs(vv)), vv.shape)
    phi = _wrap_angle(np.angle(uu[r, c] / vv[r, c]))
    residual = float(np.max(np.abs(uu - np.exp(1j * phi) * vv)))
    if residual <= tol:
        return EquivalenceClass("global_phase", residual, phase=float(phi))

    # diagonal phases, one per row, from each row's largest entry of V
    diag = np.empty(DIM, dtype=complex)
    for row in range(DIM):
        col = int(np.argmax(np.abs(vv[row])))
        diag[row] = uu[row, col] / vv[row, col]
    if np.max(np.abs(np.abs(diag) - 1.0)) <= tol:
        residual = float(np.max(np.abs(uu - diag[:, None] * vv)))
        if residual <= tol and np.max(np.abs(diag.imag)) > tol:
            return EquivalenceClass(
                "diagonal_phase", residual, phases=tuple(complex(z) for z in diag)
            )

    # entrywise sign flips
    flips = []
    agree = True
    worst = 0.0
    for row in range(DIM):
        for col in range(DIM):
            d_same = float(abs(uu[row, col] - vv[row, col]))
            d_flip = float(abs(uu[row, col] + vv[row, col]))
            if d_same <= tol:
                worst = max(worst, d_same)
            elif d_flip <= tol and abs(vv[row, col]) > tol:
                flips.append((row, col))
                worst = max(worst, d_flip)
            else:
                agree = False
    if agree and flips:
        return EquivalenceClass("sign_flips", worst, flips=tuple(flips))

    return EquivalenceClass("mismatch", direct)
