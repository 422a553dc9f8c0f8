"""Command-line front end: parse a TOML run configuration, dispatch scenario
runs and emit deterministic columnar CSV files.

Every output starts with ``#``-prefixed metadata lines carrying the tool
version, a short hash of the effective configuration, the coupling model and
the full configuration as canonical JSON, so any output file can be traced
back to (and re-parsed into) the exact RunConfig that produced it.  Floats
are written with 9 significant digits; identical configurations produce
byte-identical files regardless of the worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calib import FitError, Waveform, biastee_predistort, clamp_population, iq_project
from .config import (
    ConfigError,
    RunConfig,
    build_initial_state,
    build_system_spec,
    canonical_json,
    default_config,
    load_config,
    spec_hash,
)
from .hilbert import angular_to_ghz, ghz_to_angular
from .propagate import SimulationError
from .protocol import (
    PopulationMap,
    calibrate_offset,
    run_excited_qubit_scan,
    run_fock_scan,
    run_population_map,
)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _header_lines(command: str, config: RunConfig) -> list[str]:
    return [
        f"# mslz {command} v{__version__}",
        f"# spec_hash={spec_hash(config)}",
        f"# coupling_model={config.system.coupling_model}",
        f"# config={canonical_json(config)}",
    ]


def _write_csv(path: Path, command: str, config: RunConfig, columns: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for line in _header_lines(command, config):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_header_config(path: str | Path) -> RunConfig:
    """Recover the exact RunConfig embedded in a CSV metadata header."""
    import json

    with open(path) as fh:
        for line in fh:
            if line.startswith("# config="):
                return RunConfig.from_dict(json.loads(line[len("# config=") :]))
            if not line.startswith("#"):
                break
    raise ConfigError(f"{path} carries no '# config=' header line")


def read_table(path: str | Path, expected_columns: list[str]) -> np.ndarray:
    """Read a columnar CSV (ignoring # headers) and check its column names."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ConfigError(f"{path} holds no data rows")
    names = [c.strip() for c in lines[0].split(",")]
    if names != expected_columns:
        raise ConfigError(f"{path} columns {names} do not match expected {expected_columns}")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise ConfigError(f"{path} contains a non-numeric field: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(expected_columns):
        raise ConfigError(f"{path} rows do not match the {len(expected_columns)}-column schema")
    return data


def read_sweep_csv(path: str | Path) -> PopulationMap:
    """Parse a sweep CSV (with its config header) back into a PopulationMap."""
    config = read_header_config(path)
    data = read_table(path, ["t_rise_ns", "t_ns", "omega_q_GHz", "P_q"])
    omega_i = ghz_to_angular(config.system.qubit_start_ghz)
    omega_f = ghz_to_angular(config.system.qubit_stop_ghz)
    rise_times, times, pops = [], [], []
    for t_rise in dict.fromkeys(data[:, 0]):
        rows = data[data[:, 0] == t_rise]
        rise_times.append(t_rise)
        times.append(rows[:, 1])
        pops.append(rows[:, 3])
    return PopulationMap(
        rise_times=np.array(rise_times),
        times=times,
        populations=pops,
        omega_i=omega_i,
        omega_f=omega_f,
        metadata={"source": str(path)},
    )


def _sweep_rows(pmap: PopulationMap):
    for r, t_rise in enumerate(pmap.rise_times):
        omega_ghz = angular_to_ghz(pmap.omega_q(r))
        for t, w, p in zip(pmap.times[r], omega_ghz, pmap.populations[r]):
            yield (t_rise, t, w, p)


def cmd_sweep(config: RunConfig, out_dir: Path, jobs: int) -> Path:
    spec = build_system_spec(config)
    initial = build_initial_state(config.scenario.initial_state)
    pmap = run_population_map(
        spec,
        config.scenario.rise_times_ns,
        initial,
        jobs=jobs,
        integrator=config.numerics.integrator,
        sample_spacing=config.scenario.sample_spacing_ns,
        step_limit=config.numerics.step_limit_ns,
        norm_tolerance=config.numerics.norm_tolerance,
    )
    return _write_csv(
        out_dir / "sweep.csv", "sweep", config,
        ["t_rise_ns", "t_ns", "omega_q_GHz", "P_q"], _sweep_rows(pmap),
    )


def cmd_lzcurve(config: RunConfig, out_dir: Path, jobs: int) -> Path:
    spec = build_system_spec(config)
    _, curve = run_excited_qubit_scan(
        spec,
        config.scenario.rise_times_ns,
        jobs=jobs,
        integrator=config.numerics.integrator,
        sample_spacing=config.scenario.sample_spacing_ns,
        step_limit=config.numerics.step_limit_ns,
        norm_tolerance=config.numerics.norm_tolerance,
    )
    rows = zip(curve.rise_times, curve.simulated, curve.analytic)
    return _write_csv(
        out_dir / "lzcurve.csv", "lzcurve", config,
        ["t_rise_ns", "P_q_sim", "P_q_formula"], rows,
    )


def cmd_fock(config: RunConfig, out_dir: Path, jobs: int) -> Path:
    spec = build_system_spec(config)
    scan = run_fock_scan(
        spec,
        config.fock.photon_numbers,
        config.fock.t_rise_ns,
        config.fock.excited_mode,
        jobs=jobs,
        integrator=config.numerics.integrator,
        sample_spacing=config.scenario.sample_spacing_ns,
        step_limit=config.numerics.step_limit_ns,
        norm_tolerance=config.numerics.norm_tolerance,
    )
    rows = (
        (n, t, p)
        for n, pop in zip(scan.photon_numbers, scan.populations)
        for t, p in zip(scan.times, pop)
    )
    return _write_csv(out_dir / "fock.csv", "fock", config, ["n", "t_ns", "P_q"], rows)


def cmd_predistort(config: RunConfig, out_dir: Path, jobs: int) -> Path:
    pd = config.predistort
    if pd.input_csv:
        data = read_table(pd.input_csv, ["t_ns", "I_mA"])
        t = data[:, 0]
        steps = np.diff(t)
        if len(steps) == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ConfigError(f"{pd.input_csv} must be uniformly sampled")
        current = Waveform(float(steps[0]), data[:, 1], unit="mA")
    else:
        pulse = pd.pulse
        t = np.arange(0.0, pulse.total_ns + 0.5 * pulse.sample_period_ns, pulse.sample_period_ns)
        values = np.where(t <= pulse.duration_ns, pulse.amplitude_ma, 0.0)
        current = Waveform(pulse.sample_period_ns, values, unit="mA")
    volts = biastee_predistort(current, pd.tau_ns, pd.resistance_ohm)
    rows = zip(current.times, current.values, volts.values)
    return _write_csv(
        out_dir / "predistort.csv", "predistort", config, ["t_ns", "I_mA", "V_mV"], rows
    )


def cmd_iqproject(config: RunConfig, out_dir: Path, jobs: int) -> Path:
    iq = config.iqproject
    if not iq.input_csv:
        raise ConfigError("iqproject.input_csv is required")
    data = read_table(iq.input_csv, ["i", "q"])
    points = data[:, 0] + 1j * data[:, 1]
    ref_g = complex(iq.ref_g[0], iq.ref_g[1])
    ref_e = complex(iq.ref_e[0], iq.ref_e[1])
    try:
        raw = iq_project(points, ref_g, ref_e)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = zip(data[:, 0], data[:, 1], raw, clamp_population(raw))
    return _write_csv(
        out_dir / "iqproject.csv", "iqproject", config, ["i", "q", "P_raw", "P_clamped"], rows
    )


def cmd_calibrate_offset(config: RunConfig, out_dir: Path, jobs: int) -> Path:
    off = config.calibrate_offset
    if not off.map_a_csv or not off.map_b_csv:
        raise ConfigError("calibrate_offset.map_a_csv and map_b_csv are required")
    map_a = read_sweep_csv(off.map_a_csv)
    map_b = read_sweep_csv(off.map_b_csv)
    fit = calibrate_offset(
        map_a, map_b,
        dt_window_ns=off.dt_window_ns,
        df_window_mhz=off.df_window_mhz,
        dt_step_ns=off.dt_step_ns,
        df_step_mhz=off.df_step_mhz,
    )
    rows = [(fit.delta_t_ns, 1e3 * fit.delta_f_ghz, fit.mse, fit.n_points)]
    return _write_csv(
        out_dir / "offset_fit.csv", "calibrate-offset", config,
        ["dt_ns", "df_MHz", "mse", "n_points"], rows,
    )


_COMMANDS = {
    "sweep": cmd_sweep,
    "lzcurve": cmd_lzcurve,
    "fock": cmd_fock,
    "predistort": cmd_predistort,
    "iqproject": cmd_iqproject,
    "calibrate-offset": cmd_calibrate_offset,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route usage problems to exit code 1
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mslz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mslz {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML run configuration (defaults used if omitted)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel trajectory workers")
        p.add_argument("--coupling-model", choices=["rwa", "full"], default=None)
        p.add_argument("--modes", type=int, default=None,
                       help="use only the first N configured modes")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    system = config.system
    if args.coupling_model:
        system = dataclasses.replace(system, coupling_model=args.coupling_model)
    if args.modes is not None:
        n = args.modes
        if n < 1 or n > len(system.mode_frequencies_ghz):
            raise ConfigError(
                f"--modes must be between 1 and {len(system.mode_frequencies_ghz)}, got {n}"
            )
        system = dataclasses.replace(
            system,
            mode_frequencies_ghz=system.mode_frequencies_ghz[:n],
            mode_couplings_mhz=system.mode_couplings_mhz[:n],
            mode_fock_cutoffs=system.mode_fock_cutoffs[:n],
        )
    return dataclasses.replace(config, system=system)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config) if args.config else default_config()
        config = _apply_overrides(config, args)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        path = _COMMANDS[args.command](config, Path(args.out), args.jobs)
    except ConfigError as exc:
        print(f"mslz: config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"mslz: config error: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, FitError) as exc:
        print(f"mslz: simulation error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
