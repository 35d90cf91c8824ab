import json

import numpy as np
import pytest

from quartit import gates, matio, reports
from quartit.cli import main


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse-level usage errors
        code = exc.code
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# verify-gates
# ---------------------------------------------------------------------------

def test_verify_gates_all_clean(capsys):
    code, out, err = run(capsys, "verify-gates")
    assert code == 0
    assert err == ""
    table = reports.parse_table(out)
    assert len(table.rows) == 15
    assert table.params["mismatches"] == 0.0
    by_name = {row[0]: row for row in table.rows}
    assert by_name["NOT_A"][table.columns.index("class")] == "exact"
    assert by_name["X02_SPLIT"][table.columns.index("class")] == "mismatch"


def test_verify_gates_single_gate_filter(capsys):
    code, out, err = run(capsys, "verify-gates", "--gate", "H_B")
    assert code == 0
    table = reports.parse_table(out)
    assert len(table.rows) == 1
    assert table.rows[0][0] == "H_B"


def test_verify_gates_unknown_gate(capsys):
    code, out, err = run(capsys, "verify-gates", "--gate", "TOFFOLI")
    assert code == 64
    assert "unknown gate" in err


def test_verify_gates_tampered_expectations(capsys, tmp_path):
    expected = gates.expected_classes()
    expected["CNOT_AB"] = dict(expected["CNOT_AB"], phase=0.5)
    bad = tmp_path / "expected.json"
    bad.write_text(json.dumps(expected))
    code, out, err = run(capsys, "verify-gates", "--expected", str(bad))
    assert code == 1
    assert "mismatch" in err
    assert "CNOT_AB" in err
    table = reports.parse_table(out)
    assert table.params["mismatches"] >= 1


def test_verify_gates_structured_output(capsys):
    code, out, err = run(capsys, "verify-gates", "--format", "structured")
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["command"] == "verify-gates"
    assert len(doc["rows"]) == 15
    assert doc["columns"][0] == "name"


# ---------------------------------------------------------------------------
# tomography
# ---------------------------------------------------------------------------

def test_tomography_requires_seed(capsys):
    code, out, err = run(capsys, "tomography", "--set", "six")
    assert code == 64
    assert "--seed" in err


def test_tomography_noiseless_reconstruction(capsys):
    code, out, err = run(
        capsys, "tomography", "--set", "six", "--noise", "0",
        "--trials", "10", "--seed", "3",
    )
    assert code == 0
    table = reports.parse_table(out)
    assert table.params["rank"] == 16.0
    assert table.params["rows"] == 22.0
    col = table.columns.index("frobenius_error_raw")
    assert len(table.rows) == 10
    assert all(row[col] < 1e-10 for row in table.rows)


def test_tomography_rank_deficient_set_degrades(capsys, tmp_path):
    seq = tmp_path / "only_one.seq"
    seq.write_text("X(0,1,pi/2)\n")
    code, out, err = run(
        capsys, "tomography", "--set", f"file:{seq}", "--seed", "1",
    )
    assert code == 2
    assert "rank" in err
    table = reports.parse_table(out)
    assert not table.rows
    assert "warning" in table.params
    assert "rho_" in table.params["warning"]


def test_tomography_parallel_matches_serial(capsys):
    args = ("tomography", "--set", "twelve", "--noise", "1e-3",
            "--trials", "8", "--seed", "11")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args, "--parallel", "3")
    assert code1 == code2 == 0
    assert out1 == out2


def test_tomography_rerun_is_byte_identical(capsys, tmp_path):
    out_a = tmp_path / "a.tsv"
    out_b = tmp_path / "b.tsv"
    args = ("tomography", "--set", "six", "--noise", "1e-3",
            "--trials", "5", "--seed", "7")
    assert run(capsys, *args, "--out", str(out_a))[0] == 0
    assert run(capsys, *args, "--out", str(out_b))[0] == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_tomography_unknown_set(capsys):
    code, out, err = run(capsys, "tomography", "--set", "nine", "--seed", "1")
    assert code == 64
    assert "rotation set" in err


# ---------------------------------------------------------------------------
# compile
# ---------------------------------------------------------------------------

def test_compile_shipped_not_b(capsys):
    code, out, err = run(capsys, "compile", "seqs/not_b.seq")
    assert code == 0
    matrix = matio.parse_matrix(out)
    ix = np.kron(np.eye(2), np.array([[0, 1], [1, 0]]))
    assert np.abs(matrix - ix).max() < 1e-12


def test_compile_missing_file(capsys):
    code, out, err = run(capsys, "compile", "no_such.seq")
    assert code == 66
    assert "not found" in err


def test_compile_syntax_error_reports_location(capsys, tmp_path):
    bad = tmp_path / "bad.seq"
    bad.write_text("X(0,1,pi)\nW(2,3,pi)\n")
    code, out, err = run(capsys, "compile", str(bad))
    assert code == 65
    assert "line 2" in err


def test_compile_empty_sequence_is_data_error(capsys, tmp_path):
    empty = tmp_path / "empty.seq"
    empty.write_text("# nothing here\n")
    code, out, err = run(capsys, "compile", str(empty))
    assert code == 65
    assert "no pulses" in err


# ---------------------------------------------------------------------------
# rabi / fitdecay round trip
# ---------------------------------------------------------------------------

def test_rabi_then_fitdecay_recovers_t2(capsys, tmp_path):
    trace = tmp_path / "trace.tsv"
    code, out, err = run(
        capsys, "rabi", "--pair", "1,2", "--t2", "0.6e-3", "--out", str(trace),
    )
    assert code == 0
    code, out, err = run(capsys, "fitdecay", str(trace))
    assert code == 0
    table = reports.parse_table(out)
    row = dict(zip(table.columns, table.rows[0]))
    assert abs(row["t2_estimate"] - 0.6e-3) / 0.6e-3 < 0.02
    assert row["rabi_hz"] == pytest.approx(1e4, rel=1e-3)


def test_rabi_rejects_coarse_time_step(capsys):
    code, out, err = run(capsys, "rabi", "--rabi-omega", "1e6", "--dt", "2e-6")
    assert code == 64
    assert "dt" in err


def test_fitdecay_rejects_table_without_required_columns(capsys, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tb\n1.0\t2.0\n")
    code, out, err = run(capsys, "fitdecay", str(bad))
    assert code == 65
    assert "mz" in err


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def test_spectrum_reports_three_peaks(capsys):
    code, out, err = run(capsys, "spectrum", "--points", "241")
    assert code == 0
    table = reports.parse_table(out)
    freq_col = table.columns.index("frequency_hz")
    mz_col = table.columns.index("mz")
    response = np.array([row[mz_col] for row in table.rows])
    freqs = np.array([row[freq_col] for row in table.rows])
    floor = response.min()
    peaks = [
        freqs[i]
        for i in range(1, len(freqs) - 1)
        if response[i] > response[i - 1]
        and response[i] >= response[i + 1]
        and response[i] - floor > 0.01
    ]
    assert len(peaks) == 3
    assert peaks[1] == pytest.approx(40e6, abs=1.0)


def test_spectrum_grid_must_cover_lines(capsys):
    code, out, err = run(capsys, "spectrum", "--span", "1e3")
    assert code == 64
    assert "grid" in err


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------

def test_prepare_default_target(capsys):
    code, out, err = run(capsys, "prepare")
    assert code == 0
    table = reports.parse_table(out)
    assert table.params["target"] == 11.0  # bit string, numeric to the parser
    assert table.params["epsilon"] == pytest.approx(0.2)
    final = table.rows[-1]
    assert final[1:] == pytest.approx((0.2, 0.2, 0.2, 0.4))


def test_prepare_explicit_target_00(capsys):
    code, out, err = run(capsys, "prepare", "--target", "00")
    assert code == 0
    table = reports.parse_table(out)
    final = table.rows[-1]
    assert final[1:] == pytest.approx((0.4, 0.2, 0.2, 0.2))
    assert "X(0,3,pi)" in table.params["sequence"]


def test_prepare_uniform_populations_flagged(capsys):
    code, out, err = run(
        capsys, "prepare", "--populations", "0.25,0.25,0.25,0.25",
    )
    assert code == 0
    table = reports.parse_table(out)
    assert "no polarization" in table.params["note"]


def test_prepare_rejects_bad_populations(capsys):
    code, out, err = run(capsys, "prepare", "--populations", "1,0,0")
    assert code == 64


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def test_config_supplies_defaults_and_flags_win(capsys, tmp_path):
    cfg = tmp_path / "tomo.cfg"
    cfg.write_text("set = six\nnoise = 1e-3\ntrials = 5\nseed = 2\n")
    code, out, err = run(capsys, "tomography", "--config", str(cfg))
    assert code == 0
    table = reports.parse_table(out)
    assert table.params["set"] == "six"
    assert len(table.rows) == 5

    code, out, err = run(capsys, "tomography", "--config", str(cfg), "--trials", "3")
    assert code == 0
    assert len(reports.parse_table(out).rows) == 3


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sets = six\n")
    code, out, err = run(capsys, "tomography", "--config", str(cfg), "--seed", "1")
    assert code == 64
    assert "unknown config key" in err


def test_config_missing_file(capsys):
    code, out, err = run(capsys, "tomography", "--config", "nope.cfg", "--seed", "1")
    assert code == 66


def test_config_rejects_malformed_line(capsys, tmp_path):
    cfg = tmp_path / "weird.cfg"
    cfg.write_text("just some words\n")
    code, out, err = run(capsys, "tomography", "--config", str(cfg), "--seed", "1")
    assert code == 64
    assert "key=value" in err


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def test_out_file_and_quiet_stdout(capsys, tmp_path):
    dest = tmp_path / "gates.tsv"
    code, out, err = run(capsys, "verify-gates", "--out", str(dest))
    assert code == 0
    assert out == ""
    assert len(reports.parse_table(dest.read_text()).rows) == 15


def test_unwritable_out_path(capsys, tmp_path):
    # a path whose parent is a regular file cannot be created by any user
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    code, out, err = run(capsys, "verify-gates", "--out", str(blocker / "x.tsv"))
    assert code == 74
    assert "cannot write" in err


def test_plot_requires_out(capsys):
    code, out, err = run(capsys, "rabi", "--plot")
    assert code == 64
    assert out == ""  # nothing written before the usage check
    assert "--plot" in err


def test_plot_renders_png(capsys, tmp_path):
    dest = tmp_path / "trace.tsv"
    code, out, err = run(
        capsys, "rabi", "--duration", "5e-4", "--out", str(dest), "--plot",
    )
    assert code == 0
    png = dest.with_suffix(".png")
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_structured_report_round_trips_values(capsys):
    code, out, err = run(
        capsys, "tomography", "--set", "six", "--trials", "2", "--seed", "5",
        "--format", "structured",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["seed"] == 5
    assert len(doc["rows"]) == 2
    assert doc["params"]["median_error_raw"] < 1e-10


def test_parallel_must_be_positive(capsys):
    code, out, err = run(capsys, "tomography", "--seed", "1", "--parallel", "0")
    assert code == 64
    assert "--parallel" in err
