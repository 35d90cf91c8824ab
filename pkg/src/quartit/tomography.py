"""State tomography from longitudinal (Mz) detection.

A single readout of this register yields the three adjacent population
differences d_i = rho_{ii} - rho_{i-1,i-1} (the line-intensity changes of
the three single-quantum transitions).  Tomography therefore works by
applying a set of known rotations R_k and reading the triple of each
rotated state: every reading is a linear functional of the 16 real
parameters of rho, and stacking them gives a measurement map M with
M x = y.  All readout rows are traceless functionals, so the map needs the
explicit trace row to close the 16th direction; the built-in sets also
include the unrotated triple by default, which costs nothing and improves
conditioning.

Reconstruction is SVD least squares followed by projection onto physical
states (nearest_physical).  Rank-deficient maps raise with the parameter
directions they cannot resolve.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DIM, as_generator, check_density, nearest_physical, random_density
from .pulses import PulseSequence, compile_sequence, selective

__all__ = [
    "PARAMETER_NAMES",
    "MeasurementMap",
    "RankDeficiencyError",
    "ReadoutTriple",
    "ReconstructionResult",
    "RotationSet",
    "SensitivityReport",
    "TrialRecord",
    "hermitian_basis",
    "matrix_to_params",
    "measurement_map",
    "params_to_matrix",
    "readout",
    "reconstruct",
    "run_trials",
    "sensitivity",
    "set_six",
    "set_twelve",
    "simulate_experiment",
]

RANK_RTOL = 1e-10

_PAIRS = tuple((i, j) for i in range(DIM) for j in range(i + 1, DIM))

# parameter order: 4 populations, 6 real parts, 6 imaginary parts
# (upper triangle, row-major)
PARAMETER_NAMES = tuple(
    [f"rho_{k}{k}" for k in range(DIM)]
    + [f"Re rho_{i}{j}" for i, j in _PAIRS]
    + [f"Im rho_{i}{j}" for i, j in _PAIRS]
)


@dataclass(frozen=True)
class ReadoutTriple:
    """Adjacent population differences (d1, d2, d3) of one acquisition.

    Exact readouts of a density matrix lie in [-1, 1]; simulated noisy
    readings may exceed the range by O(sigma) and are not clamped.
    """

    d1: float
    d2: float
    d3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3])


def readout(rho) -> ReadoutTriple:
    """Noiseless readout triple of a state."""
    r = check_density(rho)
    d = np.real(np.diag(r))
    return ReadoutTriple(float(d[1] - d[0]), float(d[2] - d[1]), float(d[3] - d[2]))


@dataclass(frozen=True)
class RotationSet:
    """Named tomography rotations, stored as pulse sequences."""

    name: str
    rotations: tuple[PulseSequence, ...]
    include_unrotated: bool = True

    def __post_init__(self):
        object.__setattr__(self, "rotations", tuple(self.rotations))

    def __len__(self) -> int:
        return len(self.rotations)

    def unitaries(self) -> list[np.ndarray]:
        return [compile_sequence(seq) for seq in self.rotations]


def set_twelve() -> RotationSet:
    """Twelve single-pulse pi/2 readout rotations, X and Y on every pair."""
    rotations = []
    for n, m in [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)]:
        for axis in ("X", "Y"):
            rotations.append(PulseSequence((selective(axis, n, m, np.pi / 2),)))
    return RotationSet("twelve", tuple(rotations))


def set_six() -> RotationSet:
    """Six composite rotations that reach all sixteen parameters.

    Each sequence is stored temporally (first pulse acts first), i.e. the
    rightmost factor of the defining operator product comes first.
    """
    p2 = np.pi / 2
    seqs = [
        (selective("X", 2, 3, p2), selective("X", 0, 1, p2)),
        (selective("Y", 2, 3, p2), selective("Y", 0, 1, p2)),
        (selective("X", 1, 2, p2), selective("Y", 1, 3, np.pi), selective("X", 0, 1, p2)),
        (selective("Y", 1, 2, p2), selective("Y", 1, 3, np.pi), selective("Y", 0, 1, p2)),
        (selective("X", 1, 3, p2), selective("X", 0, 2, p2)),
        (selective("Y", 1, 3, p2), selective("Y", 0, 2, p2)),
    ]
    return RotationSet("six", tuple(PulseSequence(s) for s in seqs))


# ---------------------------------------------------------------------------
# parametrization
# ---------------------------------------------------------------------------

def hermitian_basis() -> list[np.ndarray]:
    """The 16 Hermitian basis matrices matching PARAMETER_NAMES."""
    basis = []
    for k in range(DIM):
        b = np.zeros((DIM, DIM), dtype=complex)
        b[k, k] = 1.0
        basis.append(b)
    for i, j in _PAIRS:
        b = np.zeros((DIM, DIM), dtype=complex)
        b[i, j] = 1.0
        b[j, i] = 1.0
        basis.append(b)
    for i, j in _PAIRS:
        b = np.zeros((DIM, DIM), dtype=complex)
        b[i, j] = 1j
        b[j, i] = -1j
        basis.append(b)
    return basis


def matrix_to_params(rho) -> np.ndarray:
    arr = np.asarray(rho, dtype=complex)
    x = np.empty(16)
    x[:4] = np.real(np.diag(arr))
    for k, (i, j) in enumerate(_PAIRS):
        x[4 + k] = arr[i, j].real
        x[10 + k] = arr[i, j].imag
    return x


def params_to_matrix(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    rho = np.zeros((DIM, DIM), dtype=complex)
    for k in range(DIM):
        rho[k, k] = v[k]
    for k, (i, j) in enumerate(_PAIRS):
        rho[i, j] = v[4 + k] + 1j * v[10 + k]
        rho[j, i] = v[4 + k] - 1j * v[10 + k]
    return rho


# ---------------------------------------------------------------------------
# measurement map
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasurementMap:
    """Stacked readout functionals: matrix @ params(rho) = readings.

    Row layout: three rows (d1, d2, d3) per rotation in set order, then the
    unrotated triple when included, then the trace row (value fixed at 1).
    """

    set_name: str
    matrix: np.ndarray
    row_labels: tuple[str, ...]
    include_unrotated: bool

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]


def _triple_rows(u: np.ndarray, basis) -> np.ndarray:
    rows = np.empty((3, 16))
    for col, b in enumerate(basis):
        rotated = u @ b @ u.conj().T
        d = np.real(np.diag(rotated))
        rows[0, col] = d[1] - d[0]
        rows[1, col] = d[2] - d[1]
        rows[2, col] = d[3] - d[2]
    return rows


def measurement_map(rotation_set: RotationSet) -> MeasurementMap:
    """Assemble the linear map from state parameters to readings."""
    basis = hermitian_basis()
    blocks = []
    labels: list[str] = []
    for k, u in enumerate(rotation_set.unitaries(), start=1):
        blocks.append(_triple_rows(u, basis))
        labels.extend(f"R{k}:d{i}" for i in (1, 2, 3))
    if rotation_set.include_unrotated:
        blocks.append(_triple_rows(np.eye(DIM, dtype=complex), basis))
        labels.extend(f"I:d{i}" for i in (1, 2, 3))
    trace_row = np.zeros((1, 16))
    trace_row[0, :4] = 1.0
    blocks.append(trace_row)
    labels.append("trace")
    return MeasurementMap(
        set_name=rotation_set.name,
        matrix=np.vstack(blocks),
        row_labels=tuple(labels),
        include_unrotated=rotation_set.include_unrotated,
    )


@dataclass(frozen=True)
class SensitivityReport:
    set_name: str
    rows: int
    rank: int
    sigma_min: float
    sigma_max: float
    condition: float

    @property
    def complete(self) -> bool:
        return self.rank == 16


def sensitivity(mmap: MeasurementMap) -> SensitivityReport:
    """Rank and conditioning of a measurement map."""
    sv = np.linalg.svd(mmap.matrix, compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    sigma_min = float(sv[rank - 1]) if rank else 0.0
    condition = float(sv[0] / sv[15]) if rank == 16 else float("inf")
    return SensitivityReport(
        set_name=mmap.set_name,
        rows=mmap.rows,
        rank=rank,
        sigma_min=sigma_min,
        sigma_max=float(sv[0]),
        condition=condition,
    )


# ---------------------------------------------------------------------------
# simulation and reconstruction
# ---------------------------------------------------------------------------

def simulate_experiment(
    rho, rotation_set: RotationSet, noise_sigma: float = 0.0, seed=None
) -> list[ReadoutTriple]:
    """Readout triples of rho under every rotation of the set.

    Gaussian noise of width noise_sigma is added independently to each of
    the three readings of a triple.  Order matches measurement_map rows
    (rotations in set order, then the unrotated triple if included).
    """
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    r = check_density(rho)
    rng = as_generator(seed)
    unitaries = rotation_set.unitaries()
    if rotation_set.include_unrotated:
        unitaries.append(np.eye(DIM, dtype=complex))
    triples = []
    for u in unitaries:
        clean = readout(u @ r @ u.conj().T).as_array()
        if noise_sigma > 0:
            clean = clean + rng.normal(0.0, noise_sigma, size=3)
        triples.append(ReadoutTriple(*map(float, clean)))
    return triples


class RankDeficiencyError(ValueError):
    """Measurement map cannot resolve all 16 parameters."""

    def __init__(self, set_name: str, rank: int, directions: tuple[str, ...]):
        self.set_name = set_name
        self.rank = rank
        self.directions = directions
        super().__init__(
            f"measurement map {set_name!r} has rank {rank} < 16; unresolved "
            f"directions: {', '.join(directions)}"
        )


def _unresolved_directions(matrix: np.ndarray, rank: int) -> tuple[str, ...]:
    # full SVD: a map with fewer than 16 rows still has a 16-column null space
    vt = np.linalg.svd(matrix, full_matrices=True)[2]
    names = []
    null_rows = vt[rank:]
    for k, name in enumerate(PARAMETER_NAMES):
        if np.any(np.abs(null_rows[:, k]) > 1e-8):
            names.append(name)
    return tuple(names)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    raw: np.ndarray
    physical: np.ndarray
    residual_norm: float
    rank: int
    condition: float


def reconstruct(readings, mmap: MeasurementMap) -> ReconstructionResult:
    """Least-squares state estimate from readout triples.

    readings must hold one ReadoutTriple per rotation (plus the unrotated
    triple when the map includes it); the trace value is not measured and
    is fixed at 1.  Raises RankDeficiencyError when the map does not
    resolve all parameters.
    """
    expected = (mmap.rows - 1) // 3
    if len(readings) != expected:
        raise ValueError(
            f"expected {expected} readout triples for map {mmap.set_name!r}, "
            f"got {len(readings)}"
        )
    u, sv, vt = np.linalg.svd(mmap.matrix, full_matrices=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    if rank < 16:
        raise RankDeficiencyError(
            mmap.set_name, rank, _unresolved_directions(mmap.matrix, rank)
        )

    y = np.empty(mmap.rows)
    for k, triple in enumerate(readings):
        y[3 * k : 3 * k + 3] = triple.as_array()
    y[-1] = 1.0  # trace row

    coeffs = (u.T @ y) / sv
    x = vt.T @ coeffs
    raw = params_to_matrix(x)
    residual = float(np.linalg.norm(mmap.matrix @ x - y))
    physical = nearest_physical(raw)
    return ReconstructionResult(
        raw=raw,
        physical=physical,
        residual_norm=residual,
        rank=rank,
        condition=float(sv[0] / sv[-1]),
    )


# ---------------------------------------------------------------------------
# repeated-trial studies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    trial: int
    set_name: str
    noise_sigma: float
    frobenius_error_raw: float
    frobenius_error_physical: float
    residual_norm: float


def run_trials(
    rotation_set: RotationSet,
    noise_sigma: float,
    trials: int,
    seed,
    parallel: int | None = None,
) -> list[TrialRecord]:
    """Reconstruction-error study over random full-rank states.

    Trial i draws its state and noise from a generator seeded with
    (seed, i), so results are identical whether or not they run in
    parallel threads.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    mmap = measurement_map(rotation_set)
    report = sensitivity(mmap)
    if not report.complete:
        raise RankDeficiencyError(
            mmap.set_name, report.rank, _unresolved_directions(mmap.matrix, report.rank)
        )

    def one(trial: int) -> TrialRecord:
        rng = np.random.default_rng([seed, trial])
        rho = random_density(rng)
        readings = simulate_experiment(rho, rotation_set, noise_sigma, seed=rng)
        result = reconstruct(readings, mmap)
        return TrialRecord(
            trial=trial,
            set_name=rotation_set.name,
            noise_sigma=noise_sigma,
            frobenius_error_raw=float(np.linalg.norm(result.raw - rho)),
            frobenius_error_physical=float(np.linalg.norm(result.physical - rho)),
            residual_norm=result.residual_norm,
        )

    if parallel and parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(one, range(trials)))
    return [one(t) for t in range(trials)]
