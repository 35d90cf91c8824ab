"""Simulator and verifier for a four-level (spin-3/2) two-qubit register.

The package models a single quartit driven by transition-selective rf
pulses: gate constructions and their machine-checked verification against
ideal two-qubit targets, Mz-only state tomography, and the surrounding
device dynamics (Rabi traces, relaxation fits, spectra, effective pure
state preparation).
"""

from .core import (
    DEFAULT_TOLERANCE,
    DIM,
    EquivalenceClass,
    bit_pair,
    equivalence_class,
    fidelity,
    frobenius_distance,
    level_index,
    level_label,
    mz,
    nearest_physical,
    random_density,
    spin_operators,
)
from .dsl import PulseSyntaxError, format_sequence, parse, parse_blocks
from .dynamics import (
    DEFAULT_POPULATIONS,
    DEFAULT_RABI_OMEGA,
    DEFAULT_RELAXATION,
    DEFAULT_SPECTRUM,
    DecayFit,
    DriveParams,
    InitialPopulations,
    PreparationResult,
    RelaxationParams,
    SpectrumParams,
    TimeSeries,
    Transition,
    default_grid,
    delta_rxx,
    fit_decay,
    prepare_effective_pure,
    rabi_trace,
    spectrum_sweep,
    transition_table,
)
from .gates import (
    VerificationReport,
    diff_against_expected,
    expected_classes,
    gate_names,
    named_sequence,
    target,
    target_table,
    verify,
    verify_all,
)
from .pulses import (
    Pulse,
    PulseSequence,
    apply,
    apply_state,
    compile_sequence,
    hard,
    pulse_unitary,
    selective,
)
from .tomography import (
    MeasurementMap,
    RankDeficiencyError,
    ReadoutTriple,
    ReconstructionResult,
    RotationSet,
    measurement_map,
    readout,
    reconstruct,
    run_trials,
    sensitivity,
    set_six,
    set_twelve,
    simulate_experiment,
)

__version__ = "0.1.0"
