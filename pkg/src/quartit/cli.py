"""Command-line front end.

Subcommands: verify-gates, tomography, compile, rabi, spectrum, prepare,
fitdecay.  Reports go to stdout or --out in either tab-separated or JSON
form and never embed timestamps, so a rerun with the same flags and seed
is byte-identical.  Exit codes: 0 success, 1 verification mismatch,
2 completed with rank degradation, 64 usage, 65 malformed input data,
66 missing input file, 74 output write failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import DEFAULT_TOLERANCE
from .dsl import PulseSyntaxError, parse, parse_blocks, format_sequence
from .dynamics import (
    DEFAULT_POPULATIONS,
    DriveParams,
    InitialPopulations,
    RelaxationParams,
    SpectrumParams,
    TimeSeries,
    default_grid,
    fit_decay,
    prepare_effective_pure,
    rabi_trace,
    spectrum_sweep,
)
from .pulses import compile_sequence
from .tomography import (
    RotationSet,
    measurement_map,
    run_trials,
    sensitivity,
    set_six,
    set_twelve,
)
from . import gates, matio, reports

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_DEGRADED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66
EXIT_IOERR = 74


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    # argparse defaults to exit code 2, which this tool reserves for
    # degraded-but-completed runs
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_pair(text: str) -> tuple[int, int]:
    digits = [c for c in text if c.isdigit()]
    if len(digits) != 2:
        raise ValueError(f"expected a level pair like 0,1, got {text!r}")
    n, m = int(digits[0]), int(digits[1])
    if not 0 <= n < m <= 3:
        raise ValueError(f"level pair must satisfy 0 <= n < m <= 3, got {text!r}")
    return n, m


def _parse_populations(text: str) -> InitialPopulations:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected 4 comma-separated populations, got {text!r}")
    return InitialPopulations(*(float(p) for p in parts))


def _parse_target(text: str) -> tuple[int, int]:
    bits = text.strip().replace(",", "")
    if len(bits) != 2 or any(b not in "01" for b in bits):
        raise ValueError(f"expected a target bit pair like 11, got {text!r}")
    return int(bits[0]), int(bits[1])


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="RNG seed (required for stochastic commands)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=reports.FORMATS, help="report format (default tabular)")
    common.add_argument("--tolerance", type=float, help="verification tolerance override")
    common.add_argument("--config", help="key=value config file; explicit flags win")
    common.add_argument("--parallel", type=int, help="run independent trials on N threads")
    common.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        help="also render a PNG figure next to --out",
    )

    parser = _Parser(prog="quartit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"quartit {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    table = {}

    p = subs.add_parser("verify-gates", parents=[common],
                        help="compile every named sequence and check its pinned class")
    p.add_argument("--gate", action="append", help="restrict to this gate (repeatable)")
    p.add_argument("--expected", help="JSON file of pinned classes (default: shipped data)")
    table["verify-gates"] = p

    p = subs.add_parser("tomography", parents=[common],
                        help="reconstruction-error study over random states")
    p.add_argument("--set", dest="set_name",
                   help="rotation set: twelve, six, or file:PATH (default twelve)")
    p.add_argument("--noise", type=float, help="gaussian readout noise sigma (default 0)")
    p.add_argument("--trials", type=int, help="number of random states (default 100)")
    table["tomography"] = p

    p = subs.add_parser("compile", parents=[common],
                        help="compile a pulse-program file to a unitary matrix")
    p.add_argument("sequence", help="pulse program file")
    table["compile"] = p

    p = subs.add_parser("rabi", parents=[common],
                        help="driven oscillation trace with relaxation")
    p.add_argument("--pair", type=_parse_pair, help="driven level pair (default 0,1)")
    p.add_argument("--rabi-omega", type=float, help="Rabi frequency in Hz (default 1e4)")
    p.add_argument("--t1", type=float, help="longitudinal relaxation time in s (default 100)")
    p.add_argument("--t2", type=float, help="transverse relaxation time in s (default 0.6e-3)")
    p.add_argument("--duration", type=float, help="trace length in s (default 3e-3)")
    p.add_argument("--dt", type=float, help="integration step in s (default 2e-6)")
    p.add_argument("--populations", type=_parse_populations,
                   help="initial populations p0,p1,p2,p3 (default 0.1,0.2,0.3,0.4)")
    p.add_argument("--k-rxx", type=float, help="resistance per unit Mz (default 1)")
    table["rabi"] = p

    p = subs.add_parser("spectrum", parents=[common],
                        help="swept-frequency response of the three one-photon lines")
    p.add_argument("--amplitude", type=float, help="drive amplitude in Hz (default 1e4)")
    p.add_argument("--tau", type=float, help="pulse length in s (default pi/amplitude)")
    p.add_argument("--points", type=int, help="grid points (default 241)")
    p.add_argument("--span", type=float, help="one-sided sweep half-width in Hz")
    p.add_argument("--omega0", type=float, help="Zeeman frequency in Hz (default 40e6)")
    p.add_argument("--delta-q", type=float, help="quadrupolar shift in Hz (default 12.5e3)")
    p.add_argument("--invert-quadrupole", action=argparse.BooleanOptionalAction,
                   help="flip which adjacent gap sits below omega0")
    p.add_argument("--k-rxx", type=float, help="resistance per unit Mz (default 1)")
    p.add_argument("--populations", type=_parse_populations,
                   help="initial populations (default 0.1,0.2,0.3,0.4)")
    table["spectrum"] = p

    p = subs.add_parser("prepare", parents=[common],
                        help="effective-pure-state preparation trace")
    p.add_argument("--target", type=_parse_target, help="target bit pair (default 11)")
    p.add_argument("--populations", type=_parse_populations,
                   help="initial populations (default 0.1,0.2,0.3,0.4)")
    table["prepare"] = p

    p = subs.add_parser("fitdecay", parents=[common],
                        help="fit a damped cosine to a rabi report")
    p.add_argument("table", help="tabular report produced by the rabi command")
    table["fitdecay"] = p

    return parser, table


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

def _read_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise CliError(EXIT_NOINPUT, f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_USAGE, f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _merge_config(args, subparser):
    if not args.config:
        return
    actions = {}
    for action in subparser._actions:
        if not action.option_strings:  # positionals cannot come from a config file
            continue
        if not hasattr(args, action.dest):  # e.g. the help action
            continue
        # accept both the destination name and the flag spelling, so
        # "--set six" on the command line is "set = six" in a file
        actions[action.dest] = action
        for opt in action.option_strings:
            actions[opt.lstrip("-").replace("-", "_")] = action
    for key, raw in _read_config(args.config).items():
        name = key.replace("-", "_")
        if name not in actions or name == "config":
            raise CliError(EXIT_USAGE, f"unknown config key {key!r}")
        action = actions[name]
        dest = action.dest
        if getattr(args, dest) is not None:
            continue  # explicit flag wins
        try:
            if isinstance(action, argparse.BooleanOptionalAction):
                value = _parse_bool(raw)
            elif action.type is not None:
                value = action.type(raw)
            else:
                value = raw
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"config key {key!r}: {exc}")
        if action.choices is not None and value not in action.choices:
            raise CliError(EXIT_USAGE, f"config key {key!r}: must be one of {action.choices}")
        setattr(args, dest, value)


def _default(value, fallback):
    return fallback if value is None else value


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IOERR, f"cannot write {args.out}: {exc}")


def _plot_path(args) -> Path | None:
    if not args.plot:
        return None
    if args.out is None:
        raise CliError(EXIT_USAGE, "--plot requires --out so the figure has a home")
    return Path(args.out).with_suffix(".png")


def _render(args, params, columns, rows) -> str:
    return reports.render(params, columns, rows, _default(args.format, "tabular"))


def _read_input(path: str) -> str:
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise CliError(EXIT_NOINPUT, f"input file not found: {path}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify_gates(args) -> int:
    tol = _default(args.tolerance, DEFAULT_TOLERANCE)
    names = args.gate if args.gate else list(gates.gate_names())
    try:
        results = [gates.verify(name, tol=tol) for name in names]
    except KeyError as exc:
        raise CliError(EXIT_USAGE, f"unknown gate {exc.args[0]!r}")

    expected = gates.expected_classes()
    if args.expected is not None:
        try:
            expected = json.loads(_read_input(args.expected))
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_DATA, f"{args.expected}: invalid JSON: {exc}")
    if args.gate:
        expected = {k: v for k, v in expected.items() if k in set(names)}
    problems = gates.diff_against_expected(results, expected)

    columns = ("name", "target", "kind", "pulses", "class", "residual", "relation", "notes")
    rows = [
        (r["name"], r["target"], r["kind"], r["pulses"], r["class"],
         r["residual"], r["relation"], r["notes"])
        for r in gates.report_records(results)
    ]
    params = {
        "command": "verify-gates",
        "tolerance": tol,
        "gates": len(rows),
        "mismatches": len(problems),
    }
    _emit(args, _render(args, params, columns, rows))
    if problems:
        for line in problems:
            print(f"mismatch: {line}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _load_rotation_set(spec: str) -> RotationSet:
    if spec == "twelve":
        return set_twelve()
    if spec == "six":
        return set_six()
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        blocks = parse_blocks(_read_input(path))
        return RotationSet(spec, tuple(blocks))
    raise CliError(EXIT_USAGE, f"unknown rotation set {spec!r}; expected twelve, six or file:PATH")


def cmd_tomography(args) -> int:
    if args.seed is None:
        raise CliError(EXIT_USAGE, "tomography draws random states; --seed is required")
    rset = _load_rotation_set(_default(args.set_name, "twelve"))
    noise = _default(args.noise, 0.0)
    trials = _default(args.trials, 100)
    if noise < 0:
        raise CliError(EXIT_USAGE, f"noise must be >= 0, got {noise}")
    if trials < 1:
        raise CliError(EXIT_USAGE, f"trials must be >= 1, got {trials}")

    mmap = measurement_map(rset)
    sens = sensitivity(mmap)
    params = {
        "command": "tomography",
        "set": rset.name,
        "noise_sigma": noise,
        "trials": trials,
        "seed": args.seed,
        "rows": sens.rows,
        "rank": sens.rank,
        "sigma_min": sens.sigma_min,
        "sigma_max": sens.sigma_max,
        "condition": sens.condition,
    }
    columns = ("trial", "frobenius_error_raw", "frobenius_error_physical", "residual_norm")

    if not sens.complete:
        from .tomography import _unresolved_directions

        directions = _unresolved_directions(mmap.matrix, sens.rank)
        params["warning"] = (
            f"rank {sens.rank} < 16; unresolved: {', '.join(directions)}"
        )
        _emit(args, _render(args, params, columns, []))
        print(
            f"warning: measurement map {rset.name!r} has rank {sens.rank} < 16; "
            f"cannot reconstruct: {', '.join(directions)}",
            file=sys.stderr,
        )
        return EXIT_DEGRADED

    records = run_trials(rset, noise, trials, seed=args.seed, parallel=args.parallel)
    params["median_error_raw"] = float(np.median([r.frobenius_error_raw for r in records]))
    params["median_error_physical"] = float(
        np.median([r.frobenius_error_physical for r in records])
    )
    params["median_residual"] = float(np.median([r.residual_norm for r in records]))
    rows = [
        (r.trial, r.frobenius_error_raw, r.frobenius_error_physical, r.residual_norm)
        for r in records
    ]
    _emit(args, _render(args, params, columns, rows))
    path = _plot_path(args)
    if path is not None:
        from . import plots

        plots.plot_trials(records, path)
    return EXIT_OK


def cmd_compile(args) -> int:
    text = _read_input(args.sequence)
    seq = parse(text)
    if not seq.pulses:
        raise CliError(EXIT_DATA, f"{args.sequence}: no pulses to compile")
    unitary = compile_sequence(seq)
    comments = [
        f"compiled from {args.sequence}",
        f"{len(seq)} pulses, global phase {seq.global_phase:.12g}",
    ]
    _emit(args, matio.format_matrix(unitary, comments))
    return EXIT_OK


def cmd_rabi(args) -> int:
    drive = DriveParams(
        pair=_default(args.pair, (0, 1)),
        rabi_omega=2 * math.pi * _default(args.rabi_omega, 1e4),
    )
    relax = RelaxationParams(t1=_default(args.t1, 100.0), t2=_default(args.t2, 0.6e-3))
    pops = _default(args.populations, DEFAULT_POPULATIONS)
    series = rabi_trace(
        pops.as_density(),
        drive,
        relax,
        duration=_default(args.duration, 3e-3),
        dt=_default(args.dt, 2e-6),
        k_rxx=_default(args.k_rxx, 1.0),
    )
    params = {"command": "rabi", **series.params}
    columns = ("t", "mz", "delta_rxx")
    rows = list(zip(series.times, series.mz, series.delta_rxx))
    _emit(args, _render(args, params, columns, rows))
    path = _plot_path(args)
    if path is not None:
        from . import plots

        plots.plot_timeseries(series, path)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    params_obj = SpectrumParams(
        omega0=2 * math.pi * _default(args.omega0, 40e6),
        delta_q=2 * math.pi * _default(args.delta_q, 12.5e3),
        k_rxx=_default(args.k_rxx, 1.0),
        invert_quadrupole=_default(args.invert_quadrupole, False),
    )
    amplitude = 2 * math.pi * _default(args.amplitude, 1e4)
    tau = _default(args.tau, math.pi / amplitude)
    span = None if args.span is None else 2 * math.pi * args.span
    grid = default_grid(params_obj, points=_default(args.points, 241), span=span)
    pops = _default(args.populations, DEFAULT_POPULATIONS)
    points = spectrum_sweep(pops.as_density(), params_obj, amplitude, tau, grid)
    params = {
        "command": "spectrum",
        "omega0_hz": params_obj.omega0 / (2 * math.pi),
        "delta_q_hz": params_obj.delta_q / (2 * math.pi),
        "invert_quadrupole": params_obj.invert_quadrupole,
        "k_rxx": params_obj.k_rxx,
        "amplitude_rad_s": amplitude,
        "tau_s": tau,
        "points": len(points),
    }
    columns = ("frequency_hz", "mz", "delta_rxx")
    rows = [(p.frequency_hz, p.mz, p.delta_rxx) for p in points]
    _emit(args, _render(args, params, columns, rows))
    path = _plot_path(args)
    if path is not None:
        from . import plots

        plots.plot_spectrum(points, path)
    return EXIT_OK


def cmd_prepare(args) -> int:
    pops = _default(args.populations, DEFAULT_POPULATIONS)
    result = prepare_effective_pure(pops, _default(args.target, (1, 1)))
    params = {
        "command": "prepare",
        "target": "".join(str(b) for b in _default(args.target, (1, 1))),
        "epsilon": result.epsilon,
        "deviation": result.deviation,
        "sequence": " ; ".join(format_sequence(result.sequence).splitlines()),
    }
    if result.note:
        params["note"] = result.note
    columns = ("stage", "p0", "p1", "p2", "p3")
    rows = [(label, *pops_) for label, pops_ in result.stages]
    _emit(args, _render(args, params, columns, rows))
    path = _plot_path(args)
    if path is not None:
        from . import plots

        plots.plot_stages(result.stages, path)
    return EXIT_OK


def cmd_fitdecay(args) -> int:
    try:
        table = reports.parse_table(_read_input(args.table))
    except ValueError as exc:
        raise CliError(EXIT_DATA, f"{args.table}: {exc}")
    if "t" not in table.columns or "mz" not in table.columns:
        raise CliError(EXIT_DATA, f"{args.table}: need 't' and 'mz' columns, got {table.columns}")
    t_col = table.columns.index("t")
    mz_col = table.columns.index("mz")
    series = TimeSeries(
        times=np.array([row[t_col] for row in table.rows], dtype=float),
        mz=np.array([row[mz_col] for row in table.rows], dtype=float),
    )
    fit = fit_decay(series)
    params = {
        "command": "fitdecay",
        "input": args.table,
        "samples": len(series),
        "converged": fit.converged,
        "no_decay_resolved": fit.no_decay_resolved,
    }
    columns = ("t2_estimate", "rabi_omega_rad_s", "rabi_hz", "amplitude", "phase",
               "offset", "rms_residual")
    rows = [(
        fit.t2_estimate, fit.rabi_estimate, fit.rabi_estimate / (2 * math.pi),
        fit.amplitude, fit.phase, fit.offset, fit.rms_residual,
    )]
    _emit(args, _render(args, params, columns, rows))
    path = _plot_path(args)
    if path is not None:
        from . import plots

        plots.plot_fit(series, fit, path)
    return EXIT_OK


_HANDLERS = {
    "verify-gates": cmd_verify_gates,
    "tomography": cmd_tomography,
    "compile": cmd_compile,
    "rabi": cmd_rabi,
    "spectrum": cmd_spectrum,
    "prepare": cmd_prepare,
    "fitdecay": cmd_fitdecay,
}


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args, subparsers[args.command])
        if args.parallel is not None and args.parallel < 1:
            raise CliError(EXIT_USAGE, f"--parallel must be >= 1, got {args.parallel}")
        if args.plot and args.out is None:
            raise CliError(EXIT_USAGE, "--plot requires --out so the figure has a home")
        return _HANDLERS[args.command](args)
    except CliError as exc:
        print(f"quartit: {exc.message}", file=sys.stderr)
        return exc.code
    except PulseSyntaxError as exc:
        print(f"quartit: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"quartit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
