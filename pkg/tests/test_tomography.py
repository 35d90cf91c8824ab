import numpy as np
import pytest

from quartit import tomography as tm
from quartit.core import random_density
from quartit.dsl import parse_blocks
from quartit.pulses import PulseSequence, selective


# ---------------------------------------------------------------------------
# readout and parametrization
# ---------------------------------------------------------------------------

def test_readout_is_adjacent_population_differences():
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    triple = tm.readout(rho)
    assert (triple.d1, triple.d2, triple.d3) == pytest.approx((0.1, 0.1, 0.1))
    flat = tm.readout(np.eye(4) / 4)
    assert flat.as_array() == pytest.approx([0.0, 0.0, 0.0])


def test_parameter_names_order():
    assert tm.PARAMETER_NAMES[:4] == ("rho_00", "rho_11", "rho_22", "rho_33")
    assert tm.PARAMETER_NAMES[4] == "Re rho_01"
    assert tm.PARAMETER_NAMES[9] == "Re rho_23"
    assert tm.PARAMETER_NAMES[10] == "Im rho_01"
    assert len(tm.PARAMETER_NAMES) == 16


def test_hermitian_basis_matches_parametrization():
    basis = tm.hermitian_basis()
    assert len(basis) == 16
    rng = np.random.default_rng(81)
    for _ in range(10):
        x = rng.normal(size=16)
        rho = sum(v * b for v, b in zip(x, basis))
        assert np.allclose(rho, rho.conj().T)
        assert np.allclose(tm.matrix_to_params(rho), x, atol=1e-14)


def test_params_matrix_round_trip():
    rng = np.random.default_rng(82)
    for _ in range(10):
        rho = random_density(rng)
        again = tm.params_to_matrix(tm.matrix_to_params(rho))
        assert np.abs(again - rho).max() < 1e-15


# ---------------------------------------------------------------------------
# rotation sets and the measurement map
# ---------------------------------------------------------------------------

def test_set_twelve_composition():
    s = tm.set_twelve()
    assert s.name == "twelve"
    assert len(s) == 12
    assert all(len(seq) == 1 for seq in s.rotations)
    assert all(seq.pulses[0].angle == pytest.approx(np.pi / 2) for seq in s.rotations)


def test_set_six_composition():
    s = tm.set_six()
    assert s.name == "six"
    assert len(s) == 6
    assert [len(seq) for seq in s.rotations] == [2, 2, 3, 3, 2, 2]


def test_measurement_map_shapes_and_labels():
    m = tm.measurement_map(tm.set_twelve())
    assert m.matrix.shape == (40, 16)
    assert m.row_labels[0] == "R1:d1"
    assert m.row_labels[-4:] == ("I:d1", "I:d2", "I:d3", "trace")
    assert np.allclose(m.matrix[-1], [1.0] * 4 + [0.0] * 12)


def test_sensitivity_of_shipped_sets():
    twelve = tm.sensitivity(tm.measurement_map(tm.set_twelve()))
    assert twelve.rows == 40
    assert twelve.rank == 16
    assert twelve.sigma_min == pytest.approx(1.3194, abs=2e-4)
    assert twelve.condition == pytest.approx(3.98, abs=0.01)
    six = tm.sensitivity(tm.measurement_map(tm.set_six()))
    assert six.rows == 22
    assert six.rank == 16
    assert six.sigma_min == pytest.approx(1.1697, abs=2e-4)
    assert six.condition == pytest.approx(2.66, abs=0.01)


def test_readout_rows_are_traceless_so_trace_row_is_essential():
    m = tm.measurement_map(tm.set_twelve())
    # every readout functional kills the identity direction
    identity_params = tm.matrix_to_params(np.eye(4) / 4)
    assert np.abs(m.matrix[:-1] @ identity_params).max() < 1e-12
    # dropping the trace row loses a direction
    sv = np.linalg.svd(m.matrix[:-1], compute_uv=False)
    assert int(np.sum(sv > 1e-10 * sv[0])) == 15


def test_rank_sixteen_survives_without_unrotated_triple():
    s = tm.set_six()
    bare = tm.RotationSet("six-bare", s.rotations, include_unrotated=False)
    report = tm.sensitivity(tm.measurement_map(bare))
    assert report.rows == 19
    assert report.rank == 16


def test_rank_sixteen_survives_small_angle_errors():
    rng = np.random.default_rng(83)
    base = tm.set_six()
    for _ in range(25):
        rotations = []
        for seq in base.rotations:
            perturbed = tuple(
                selective(p.axis, *p.pair, p.angle * rng.uniform(0.95, 1.05))
                for p in seq.pulses
            )
            rotations.append(PulseSequence(perturbed))
        noisy = tm.RotationSet("six-perturbed", tuple(rotations))
        assert tm.sensitivity(tm.measurement_map(noisy)).rank == 16


def test_empty_set_resolves_only_populations():
    m = tm.measurement_map(tm.RotationSet("empty", ()))
    report = tm.sensitivity(m)
    assert report.rank == 4
    assert report.condition == np.inf
    with pytest.raises(tm.RankDeficiencyError) as err:
        tm.reconstruct([tm.ReadoutTriple(0, 0, 0)], m)
    assert err.value.rank == 4
    assert len(err.value.directions) == 12
    assert all("rho_" in d for d in err.value.directions)


def test_rotation_set_from_dsl_blocks():
    text = """X(0,1,pi/2)\nX(2,3,pi/2)\n\nY(0,1,pi/2)\nY(2,3,pi/2)\n"""
    blocks = parse_blocks(text)
    rset = tm.RotationSet("custom", tuple(blocks))
    report = tm.sensitivity(tm.measurement_map(rset))
    assert report.rows == 3 * 2 + 3 + 1
    assert report.rank < 16  # two rotations cannot span all parameters


# ---------------------------------------------------------------------------
# simulation and reconstruction
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("make", [tm.set_twelve, tm.set_six])
def test_noiseless_round_trip(make):
    rset = make()
    mmap = tm.measurement_map(rset)
    rng = np.random.default_rng(84)
    for _ in range(30):
        rho = random_density(rng)
        result = tm.reconstruct(tm.simulate_experiment(rho, rset), mmap)
        assert np.abs(result.raw - rho).max() < 1e-10
        assert result.residual_norm < 1e-10
        assert np.trace(result.raw).real == pytest.approx(1.0, abs=1e-10)


def test_simulated_noise_statistics():
    rho = np.eye(4, dtype=complex) / 4
    rset = tm.set_twelve()
    sigma = 1e-2
    rng = np.random.default_rng(85)
    samples = []
    for _ in range(200):
        for triple in tm.simulate_experiment(rho, rset, sigma, seed=rng):
            samples.extend(triple.as_array())
    samples = np.asarray(samples)
    assert abs(samples.std() - sigma) / sigma < 0.1
    assert abs(samples.mean()) < sigma


def test_simulate_rejects_negative_noise():
    with pytest.raises(ValueError):
        tm.simulate_experiment(np.eye(4) / 4, tm.set_six(), noise_sigma=-1.0)


def test_reconstruct_requires_matching_reading_count():
    mmap = tm.measurement_map(tm.set_six())
    with pytest.raises(ValueError, match="triples"):
        tm.reconstruct([tm.ReadoutTriple(0, 0, 0)], mmap)


def test_reconstruct_fixes_trace_despite_noisy_readings():
    rset = tm.set_six()
    mmap = tm.measurement_map(rset)
    rho = random_density(np.random.default_rng(86))
    readings = tm.simulate_experiment(rho, rset, noise_sigma=0.05, seed=1)
    result = tm.reconstruct(readings, mmap)
    assert np.trace(result.raw).real == pytest.approx(1.0, abs=1e-9)
    phys = result.physical
    assert np.linalg.eigvalsh(phys).min() > -1e-12
    assert np.trace(phys).real == pytest.approx(1.0, abs=1e-12)


def test_noise_error_scales_linearly():
    medians = {}
    for sigma in (1e-4, 1e-3, 1e-2):
        records = tm.run_trials(tm.set_six(), sigma, trials=50, seed=9)
        medians[sigma] = np.median([r.frobenius_error_raw for r in records])
    r1 = medians[1e-3] / 1e-3
    assert medians[1e-4] / 1e-4 == pytest.approx(r1, rel=0.05)
    assert medians[1e-2] / 1e-2 == pytest.approx(r1, rel=0.05)


def test_run_trials_deterministic_and_parallel_stable():
    serial = tm.run_trials(tm.set_twelve(), 1e-3, trials=12, seed=5)
    threaded = tm.run_trials(tm.set_twelve(), 1e-3, trials=12, seed=5, parallel=4)
    assert serial == threaded
    again = tm.run_trials(tm.set_twelve(), 1e-3, trials=12, seed=5)
    assert serial == again
    other_seed = tm.run_trials(tm.set_twelve(), 1e-3, trials=12, seed=6)
    assert serial != other_seed


def test_run_trials_rejects_rank_deficient_sets():
    with pytest.raises(tm.RankDeficiencyError):
        tm.run_trials(tm.RotationSet("empty", ()), 0.0, trials=2, seed=1)
