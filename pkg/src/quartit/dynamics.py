"""Phenomenological device dynamics.

Covers the parts of the experiment that are not pure gate algebra: the
transition-frequency table set by the quadrupolar splitting, resonantly
driven Rabi oscillations with relaxation, the swept-frequency spectrum,
readout as a resistance change proportional to Mz, and the two-pulse
recipe that turns a thermal population ladder into an effective pure
state.

The Rabi model is a two-level rotating-frame treatment of the driven pair
with spectator levels frozen.  Damping acts in the frame of the drive:
the spin-locked component (along the drive axis) decays at 1/t1 while the
two components transverse to the drive decay at 1/t2 toward the initial
thermal population difference.  This makes the observed oscillation
envelope decay at exactly 1/t2, which is the quantity the curve fit is
meant to recover; a laboratory-frame damping split would mix the two
rates into (1/t1 + 1/t2)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .core import DIM, SPIN_PROJECTIONS, check_density, level_index, mz
from .pulses import Pulse, PulseSequence, pulse_unitary, selective

__all__ = [
    "DEFAULT_POPULATIONS",
    "DEFAULT_RABI_OMEGA",
    "DEFAULT_RELAXATION",
    "DEFAULT_SPECTRUM",
    "DecayFit",
    "DriveParams",
    "InitialPopulations",
    "PreparationResult",
    "RelaxationParams",
    "SpectrumParams",
    "SpectrumPoint",
    "TimeSeries",
    "Transition",
    "default_grid",
    "delta_rxx",
    "fit_decay",
    "prepare_effective_pure",
    "rabi_trace",
    "spectrum_sweep",
    "transition_table",
]

_PAIRS = tuple((n, m) for n in range(DIM) for m in range(n + 1, DIM))


@dataclass(frozen=True)
class SpectrumParams:
    """Static device frequencies and the readout proportionality.

    omega0 is the Zeeman spacing and delta_q the quadrupolar splitting,
    both as angular frequencies in rad/s (delta_q stores the energy shift
    divided by hbar).  k_rxx converts an Mz change into a resistance
    change.  invert_quadrupole flips which adjacent gap sits below omega0;
    nothing measurable in the model distinguishes the two conventions.
    """

    omega0: float = 2 * math.pi * 40e6
    delta_q: float = 2 * math.pi * 12.5e3
    k_rxx: float = 1.0
    invert_quadrupole: bool = False

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if self.delta_q < 0:
            raise ValueError(f"delta_q must be >= 0, got {self.delta_q}")


@dataclass(frozen=True)
class RelaxationParams:
    """Longitudinal (t1) and transverse (t2) relaxation times in seconds."""

    t1: float = 100.0
    t2: float = 0.6e-3

    def __post_init__(self):
        if not self.t1 > 0:
            raise ValueError(f"t1 must be > 0, got {self.t1}")
        if not self.t2 > 0:
            raise ValueError(f"t2 must be > 0, got {self.t2}")
        if self.t2 > 2 * self.t1:
            raise ValueError(f"t2 must not exceed 2*t1, got t2={self.t2}, t1={self.t1}")


@dataclass(frozen=True)
class InitialPopulations:
    p0: float
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        pops = self.as_tuple()
        if any(p < 0 for p in pops):
            raise ValueError(f"populations must be >= 0, got {pops}")
        if abs(sum(pops) - 1.0) > 1e-9:
            raise ValueError(f"populations must sum to 1, got sum {sum(pops)}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p0, self.p1, self.p2, self.p3)

    def as_density(self) -> np.ndarray:
        return np.diag(np.asarray(self.as_tuple(), dtype=complex))


DEFAULT_SPECTRUM = SpectrumParams()
DEFAULT_RELAXATION = RelaxationParams()
DEFAULT_POPULATIONS = InitialPopulations(0.1, 0.2, 0.3, 0.4)
DEFAULT_RABI_OMEGA = 2 * math.pi * 1e4


@dataclass(frozen=True)
class Transition:
    pair: tuple[int, int]
    photon_number: int
    frequency: float  # rad/s

    @property
    def frequency_hz(self) -> float:
        return self.frequency / (2 * math.pi)


def transition_table(params: SpectrumParams = DEFAULT_SPECTRUM) -> list[Transition]:
    """All six transitions of the four-level ladder.

    Single-photon gaps sit at omega0 and omega0 -/+ 2*delta_q, two-photon
    resonances at omega0 -/+ delta_q, and the three-photon resonance at
    omega0 (the Delta-m = 3 energy split over three photons).
    """
    sign = -1.0 if params.invert_quadrupole else 1.0
    w0, dq = params.omega0, sign * params.delta_q
    freq = {
        (0, 1): w0 - 2 * dq,
        (1, 2): w0,
        (2, 3): w0 + 2 * dq,
        (0, 2): w0 - dq,
        (1, 3): w0 + dq,
        (0, 3): w0,
    }
    return [Transition(pair, pair[1] - pair[0], freq[pair]) for pair in _PAIRS]


# ---------------------------------------------------------------------------
# driven Rabi dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriveParams:
    """Resonant drive on one level pair: Rabi angular frequency in rad/s."""

    pair: tuple[int, int]
    rabi_omega: float = DEFAULT_RABI_OMEGA

    def __post_init__(self):
        if tuple(self.pair) not in _PAIRS:
            raise ValueError(f"invalid level pair {self.pair}")
        if self.rabi_omega < 0:
            raise ValueError(f"rabi_omega must be >= 0, got {self.rabi_omega}")
        object.__setattr__(self, "pair", tuple(self.pair))


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    mz: np.ndarray
    delta_rxx: np.ndarray | None = None
    populations: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


def rabi_trace(
    rho0,
    drive: DriveParams,
    relax: RelaxationParams = DEFAULT_RELAXATION,
    duration: float = 3e-3,
    dt: float = 2e-6,
    k_rxx: float = 1.0,
) -> TimeSeries:
    """Mz(t) under resonant drive of one transition, with relaxation.

    Integrates the rotating-frame two-level equations (RK4, fixed step)

        du/dt = -u/t1
        dv/dt = +W*w - v/t2
        dw/dt = -W*v - (w - w_eq)/t2

    with W the Rabi frequency, (u, v) the pair coherence, w the pair
    population difference and w_eq its initial thermal value.  Spectator
    levels are frozen, so the total population is conserved exactly.
    Requires dt < 0.1*(2*pi/W); a coarser step distorts the oscillation.
    """
    rho = check_density(rho0)
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    w_rabi = drive.rabi_omega
    if w_rabi > 0 and dt >= 0.1 * (2 * math.pi / w_rabi):
        raise ValueError(
            f"dt={dt:g} too coarse for rabi_omega={w_rabi:g} rad/s; "
            f"need dt < {0.1 * 2 * math.pi / w_rabi:g}"
        )

    n, m = drive.pair
    pops0 = np.real(np.diag(rho)).copy()
    pair_sum = pops0[n] + pops0[m]
    u = 2.0 * float(np.real(rho[n, m]))
    v = 2.0 * float(np.imag(rho[n, m]))
    w = float(pops0[n] - pops0[m])
    w_eq = w

    def deriv(u, v, w):
        return (
            -u / relax.t1,
            w_rabi * w - v / relax.t2,
            -w_rabi * v - (w - w_eq) / relax.t2,
        )

    n_steps = max(1, math.ceil(duration / dt))
    h = duration / n_steps
    times = np.linspace(0.0, duration, n_steps + 1)
    populations = np.empty((n_steps + 1, DIM))
    populations[0] = pops0
    for k in range(n_steps):
        k1 = deriv(u, v, w)
        k2 = deriv(u + 0.5 * h * k1[0], v + 0.5 * h * k1[1], w + 0.5 * h * k1[2])
        k3 = deriv(u + 0.5 * h * k2[0], v + 0.5 * h * k2[1], w + 0.5 * h * k2[2])
        k4 = deriv(u + h * k3[0], v + h * k3[1], w + h * k3[2])
        u += (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v += (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        w += (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        p = populations[k].copy()
        p[n] = 0.5 * (pair_sum + w)
        p[m] = 0.5 * (pair_sum - w)
        populations[k + 1] = p

    mz_t = populations @ np.asarray(SPIN_PROJECTIONS)
    return TimeSeries(
        times=times,
        mz=mz_t,
        delta_rxx=k_rxx * (mz_t - mz_t[0]),
        populations=populations,
        params={
            "pair": f"{n},{m}",
            "rabi_omega_rad_s": w_rabi,
            "t1_s": relax.t1,
            "t2_s": relax.t2,
            "duration_s": duration,
            "dt_s": h,
            "k_rxx": k_rxx,
        },
    )


# ---------------------------------------------------------------------------
# decay fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """Fit of A*cos(W*t + phi)*exp(-t/t2) + B to an Mz trace."""

    t2_estimate: float
    rabi_estimate: float  # rad/s
    amplitude: float
    phase: float
    offset: float
    rms_residual: float
    converged: bool
    no_decay_resolved: bool


def _damped_cosine(t, a, w, phi, rate, b):
    return a * np.cos(w * t + phi) * np.exp(-rate * t) + b


def fit_decay(series: TimeSeries) -> DecayFit:
    """Least-squares damped-cosine fit; deterministic grid-seeded start.

    The trace should contain at least three oscillation periods.  When the
    fitted t2 exceeds 100x the trace duration the decay is not resolvable
    from the data and the result is flagged.
    """
    t = np.asarray(series.times, dtype=float)
    y = np.asarray(series.mz, dtype=float)
    if t.ndim != 1 or t.shape != y.shape or len(t) < 8:
        raise ValueError("need matching 1-d times/mz arrays with >= 8 samples")
    span = float(t[-1] - t[0])
    if span <= 0:
        raise ValueError("times must be increasing")

    b0 = float(np.mean(y))
    a0 = 0.5 * float(np.ptp(y))
    if a0 < 1e-15:
        # constant trace: nothing to fit
        return DecayFit(
            t2_estimate=math.inf,
            rabi_estimate=0.0,
            amplitude=0.0,
            phase=0.0,
            offset=b0,
            rms_residual=0.0,
            converged=True,
            no_decay_resolved=True,
        )

    # frequency seed from the FFT peak (assumes near-uniform sampling)
    spectrum = np.abs(np.fft.rfft(y - b0))
    freqs = np.fft.rfftfreq(len(y), d=span / (len(y) - 1))
    w0 = 2 * math.pi * float(freqs[1 + int(np.argmax(spectrum[1:]))])
    if w0 <= 0:
        w0 = 2 * math.pi / span

    best = None
    for phi0 in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
        for r0 in (0.0, 1.0 / span, 4.0 / span):
            sse = float(np.sum((_damped_cosine(t, a0, w0, phi0, r0, b0) - y) ** 2))
            if best is None or sse < best[0]:
                best = (sse, phi0, r0)
    _, phi0, r0 = best

    lower = [-np.inf, 0.0, -np.inf, 0.0, -np.inf]
    upper = [np.inf, np.inf, np.inf, np.inf, np.inf]
    try:
        popt, _ = curve_fit(
            _damped_cosine, t, y,
            p0=[a0, w0, phi0, r0, b0],
            bounds=(lower, upper),
            maxfev=20000,
        )
        converged = True
    except RuntimeError:
        popt = [a0, w0, phi0, r0, b0]
        converged = False

    a, w, phi, rate, b = (float(x) for x in popt)
    if a < 0:
        a, phi = -a, phi + math.pi
    phi = math.remainder(phi, 2 * math.pi)
    t2 = math.inf if rate < 1e-300 else 1.0 / rate
    rms = float(np.sqrt(np.mean((_damped_cosine(t, a, w, phi, rate, b) - y) ** 2)))
    return DecayFit(
        t2_estimate=t2,
        rabi_estimate=w,
        amplitude=a,
        phase=phi,
        offset=b,
        rms_residual=rms,
        converged=converged,
        no_decay_resolved=bool(t2 >= 100.0 * span),
    )


# ---------------------------------------------------------------------------
# effective pure state preparation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PreparationResult:
    sequence: PulseSequence
    rho: np.ndarray
    epsilon: float
    deviation: float
    stages: tuple[tuple[str, tuple[float, float, float, float]], ...]
    note: str = ""


def prepare_effective_pure(
    pops: InitialPopulations, target: tuple[int, int] = (1, 1)
) -> PreparationResult:
    """Distill an effective pure state |target> from a population ladder.

    Applies X_12(pi) then X_01(pi/2), which for a linear population ladder
    equalizes the three non-|3> levels, then moves the distinguished
    population onto the target level with X_{k,3}(pi), k = 2i+j, when the
    target is not (1,1).  Residual coherence is dephased away (off-diagonal
    elements dropped), matching the averaged readout of the device.

    epsilon solves rho = (1-eps)*I/4 + eps*|t><t|; deviation is the largest
    elementwise departure from that decomposition (zero up to rounding for
    a linear ladder).  A uniform input has no polarization to distill and
    is flagged in the note.
    """
    i, j = target
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError(f"target must be a bit pair, got {target}")
    k = level_index(i, j)

    pulses: list[Pulse] = [selective("X", 1, 2, math.pi), selective("X", 0, 1, math.pi / 2)]
    if k != 3:
        pulses.append(selective("X", k, 3, math.pi))

    rho = pops.as_density()
    stages = [("initial", pops.as_tuple())]
    for pulse in pulses:
        u = pulse_unitary(pulse)
        rho = u @ rho @ u.conj().T
        diag = tuple(float(x) for x in np.real(np.diag(rho)))
        stages.append((pulse.label(), diag))
    rho = np.diag(np.diag(rho))  # dephase

    epsilon = (float(np.real(rho[k, k])) - 0.25) / 0.75
    model = (1.0 - epsilon) * np.eye(DIM) / 4.0
    model[k, k] += epsilon
    deviation = float(np.max(np.abs(rho - model)))
    note = ""
    if abs(epsilon) < 1e-12:
        note = "no polarization available"
    return PreparationResult(
        sequence=PulseSequence(tuple(pulses)),
        rho=rho,
        epsilon=epsilon,
        deviation=deviation,
        stages=tuple(stages),
        note=note,
    )


# ---------------------------------------------------------------------------
# readout and spectrum
# ---------------------------------------------------------------------------

def delta_rxx(rho_before, rho_after, params: SpectrumParams = DEFAULT_SPECTRUM) -> float:
    """Resistance change for a state change: k_rxx * (Mz_after - Mz_before)."""
    return params.k_rxx * (mz(rho_after) - mz(rho_before))


@dataclass(frozen=True)
class SpectrumPoint:
    frequency: float  # rad/s
    mz: float
    delta_rxx: float

    @property
    def frequency_hz(self) -> float:
        return self.frequency / (2 * math.pi)


def default_grid(
    params: SpectrumParams = DEFAULT_SPECTRUM, points: int = 241, span: float | None = None
) -> np.ndarray:
    """Frequency grid centered on omega0 covering all one-photon lines.

    span is the one-sided half width in rad/s; the default is 3*delta_q
    (falling back to a 2*pi*50 kHz window for a degenerate ladder).
    """
    if points < 2:
        raise ValueError(f"need at least 2 grid points, got {points}")
    if span is None:
        span = 3 * params.delta_q if params.delta_q > 0 else 2 * math.pi * 50e3
    if span <= 0:
        raise ValueError(f"span must be > 0, got {span}")
    return np.linspace(params.omega0 - span, params.omega0 + span, points)


def spectrum_sweep(
    rho0,
    params: SpectrumParams,
    drive_amplitude: float,
    pulse_length: float,
    grid,
) -> list[SpectrumPoint]:
    """Swept-frequency response: Delta-Rxx after one pulse per grid point.

    Each grid frequency drives the nearest one-photon transition (ties go
    to the lower pair) with the detuned transfer probability

        P = W^2/(W^2 + d^2) * sin^2(sqrt(W^2 + d^2) * tau / 2)

    for detuning d, so the sweep shows one peak per single-photon line.
    Multi-photon resonances are intentionally absent: their amplitudes are
    drive-strength-dependent and outside this first-order model.
    """
    rho = check_density(rho0)
    if drive_amplitude <= 0:
        raise ValueError(f"drive_amplitude must be > 0, got {drive_amplitude}")
    if pulse_length <= 0:
        raise ValueError(f"pulse_length must be > 0, got {pulse_length}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1:
        raise ValueError("grid must be a non-empty 1-d array of rad/s frequencies")
    lo, hi = params.omega0 - 3 * params.delta_q, params.omega0 + 3 * params.delta_q
    slack = 1e-9 * params.omega0
    if grid.min() > lo + slack or grid.max() < hi - slack:
        raise ValueError(
            f"grid [{grid.min():g}, {grid.max():g}] must cover [{lo:g}, {hi:g}] rad/s"
        )

    one_photon = [tr for tr in transition_table(params) if tr.photon_number == 1]
    pops0 = np.real(np.diag(rho))
    mz0 = float(pops0 @ np.asarray(SPIN_PROJECTIONS))
    w2 = drive_amplitude**2

    points = []
    for omega in grid:
        detunings = [abs(omega - tr.frequency) for tr in one_photon]
        tr = one_photon[int(np.argmin(detunings))]  # argmin keeps the lower pair on ties
        d2 = (omega - tr.frequency) ** 2
        g2 = w2 + d2
        p_transfer = (w2 / g2) * math.sin(0.5 * math.sqrt(g2) * pulse_length) ** 2
        n, m = tr.pair
        pops = pops0.copy()
        pops[n] += p_transfer * (pops0[m] - pops0[n])
        pops[m] += p_transfer * (pops0[n] - pops0[m])
        mz_after = float(pops @ np.asarray(SPIN_PROJECTIONS))
        points.append(
            SpectrumPoint(
                frequency=float(omega),
                mz=mz_after,
                delta_rxx=params.k_rxx * (mz_after - mz0),
            )
        )
    return points
