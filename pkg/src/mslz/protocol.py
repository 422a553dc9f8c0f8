"""End-to-end sweep scenarios and their derived observables.

Runs the standard experiments on a SystemSpec: an initially excited qubit
swept through the ensemble (population map plus final-population curve with
the analytic Landau-Zener product overlay), an initially excited single mode
(photon injected into the beamsplitter chain), and a two-mode Fock-ladder
scan probing the sqrt(n) coupling enhancement.  Also provides the
single-excitation dense reference propagation used as an independent
cross-check, post-transit oscillation-frequency analysis, and the grid
search aligning two population maps in time and frequency.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.signal
from scipy.integrate import solve_ivp

from .hilbert import SystemSpec, build_layout, qubit_operator
from .lzmodel import (
    InitialState,
    ModeFock,
    QuantumState,
    QubitExcited,
    SweepScenario,
    default_scenario,
    excitation_number_operator,
    frame_reference,
    qubit_frequency,
    sweep_velocity,
)
from .propagate import DEFAULT_NORM_TOLERANCE, SimulationError, evolve

POPULATION_SLACK = 1e-9


class InsufficientOscillationsError(SimulationError):
    """The requested analysis window holds too few oscillation periods."""


def qubit_population(state: QuantumState | np.ndarray, layout=None) -> float:
    """Expectation of the excited-qubit projector: sum over the excited block."""
    if isinstance(state, QuantumState):
        amps, layout = state.amplitudes, state.layout
    else:
        if layout is None:
            raise ValueError("layout required when passing a bare amplitude vector")
        amps = np.asarray(state)
    return float(np.sum(np.abs(amps[layout.qubit_stride :]) ** 2))


def lz_formula(couplings, velocity: float) -> float:
    """Product of single-crossing survival factors: prod_n exp(-2*pi*g_n^2 / v)."""
    if not velocity > 0:
        raise ValueError(f"sweep velocity must be positive, got {velocity}")
    g = np.asarray(couplings, dtype=float)
    return float(np.exp(-2.0 * math.pi * np.sum(g**2) / velocity))


def _checked_clamp(populations: np.ndarray) -> np.ndarray:
    low, high = float(np.min(populations)), float(np.max(populations))
    if low < -POPULATION_SLACK or high > 1.0 + POPULATION_SLACK:
        raise SimulationError(f"population outside [0,1] beyond slack: min={low}, max={high}")
    return np.clip(populations, 0.0, 1.0)


@dataclass
class PopulationMap:
    """Qubit population sampled over a (t_rise x t) grid."""

    rise_times: np.ndarray
    times: list[np.ndarray]
    populations: list[np.ndarray]
    omega_i: float
    omega_f: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rise_times = np.asarray(self.rise_times, dtype=float)
        if not (len(self.times) == len(self.populations) == len(self.rise_times)):
            raise ValueError("rise_times, times and populations must align")
        for t_rise, t in zip(self.rise_times, self.times):
            if not math.isclose(t[-1], t_rise, rel_tol=0, abs_tol=1e-12):
                raise ValueError(f"row final time {t[-1]} != t_rise {t_rise}")

    def velocity(self, row: int) -> float:
        return (self.omega_f - self.omega_i) / float(self.rise_times[row])

    def omega_q(self, row: int) -> np.ndarray:
        return self.omega_i + self.velocity(row) * self.times[row]

    def final_populations(self) -> np.ndarray:
        return np.array([p[-1] for p in self.populations])


@dataclass
class LZCurve:
    """Final qubit population vs rise time, with the analytic overlay."""

    rise_times: np.ndarray
    simulated: np.ndarray
    analytic: np.ndarray

    def __post_init__(self):
        if not (len(self.rise_times) == len(self.simulated) == len(self.analytic)):
            raise ValueError("curve columns must align")
        if np.any(np.asarray(self.analytic) <= 0):
            raise ValueError("analytic survival factors must be strictly positive")


@dataclass
class FockScan:
    """Qubit population traces for a ladder of initial Fock numbers."""

    photon_numbers: tuple[int, ...]
    times: np.ndarray
    populations: list[np.ndarray]
    metadata: dict = field(default_factory=dict)

    def final_populations(self) -> np.ndarray:
        return np.array([p[-1] for p in self.populations])


def _run_rows(spec, scenarios, jobs, integrator, step_limit, norm_tolerance):
    layout = build_layout(spec)
    observables = {
        "qubit_population": qubit_operator("excited_projector", layout),
        "total_excitation": excitation_number_operator(layout),
    }

    def one(scenario):
        return evolve(
            spec, scenario, observables,
            integrator=integrator, step_limit=step_limit, norm_tolerance=norm_tolerance,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, scenarios))
    return [one(s) for s in scenarios]


def _bookkeeping(metadata, trajectories):
    metadata["max_norm_drift"] = max(t.norm_drift for t in trajectories)
    metadata["max_excitation_drift"] = max(
        float(np.max(np.abs(t.observables["total_excitation"] - t.observables["total_excitation"][0])))
        for t in trajectories
    )
    return metadata


def run_population_map(
    spec: SystemSpec,
    rise_times,
    initial_state: InitialState,
    *,
    jobs: int = 1,
    integrator: str = "midpoint",
    sample_spacing: float = 1.0,
    frame_reference_value: float | None = None,
    step_limit: float | None = None,
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE,
) -> PopulationMap:
    """Propagate one scenario per rise time and collect P_q over the grid."""
    scenarios = [
        default_scenario(t, initial_state, sample_spacing, frame_reference_value) for t in rise_times
    ]
    trajectories = _run_rows(spec, scenarios, jobs, integrator, step_limit, norm_tolerance)
    metadata = _bookkeeping(
        {
            "initial_state": repr(initial_state),
            "coupling_model": spec.coupling_model.value,
            "integrator": integrator,
        },
        trajectories,
    )
    return PopulationMap(
        rise_times=np.asarray(list(rise_times), dtype=float),
        times=[t.times for t in trajectories],
        populations=[_checked_clamp(t.observables["qubit_population"]) for t in trajectories],
        omega_i=spec.omega_i,
        omega_f=spec.omega_f,
        metadata=metadata,
    )


def run_excited_qubit_scan(
    spec: SystemSpec, rise_times, *, jobs: int = 1, integrator: str = "midpoint",
    sample_spacing: float = 1.0, step_limit: float | None = None,
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE,
) -> tuple[PopulationMap, LZCurve]:
    """Initially excited qubit: population map plus final-population curve."""
    pmap = run_population_map(
        spec, rise_times, QubitExcited(), jobs=jobs, integrator=integrator,
        sample_spacing=sample_spacing, step_limit=step_limit, norm_tolerance=norm_tolerance,
    )
    analytic = np.array([lz_formula(spec.couplings, pmap.velocity(r)) for r in range(len(pmap.rise_times))])
    curve = LZCurve(pmap.rise_times.copy(), pmap.final_populations(), analytic)
    return pmap, curve


def run_excited_mode_scan(
    spec: SystemSpec, mode_index: int, rise_times, *, jobs: int = 1,
    integrator: str = "midpoint", sample_spacing: float = 1.0, step_limit: float | None = None,
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE,
) -> PopulationMap:
    """Qubit in the ground state sweeping through the ensemble with one photon
    injected into the given mode."""
    return run_population_map(
        spec, rise_times, ModeFock(mode_index, 1), jobs=jobs, integrator=integrator,
        sample_spacing=sample_spacing, step_limit=step_limit, norm_tolerance=norm_tolerance,
    )


def run_fock_scan(
    spec: SystemSpec, photon_numbers, t_rise: float, excited_mode: int = 0, *,
    jobs: int = 1, integrator: str = "midpoint", sample_spacing: float = 1.0,
    step_limit: float | None = None, norm_tolerance: float = DEFAULT_NORM_TOLERANCE,
) -> FockScan:
    """P_q(t) for a ladder of initial Fock numbers in one mode.

    The n'th crossing matrix element scales as g*sqrt(n), so higher n drives
    the transit toward the adiabatic limit.
    """
    photon_numbers = tuple(int(n) for n in photon_numbers)
    if not 0 <= excited_mode < len(spec.modes):
        raise ValueError(f"excited_mode {excited_mode} outside [0, {len(spec.modes)})")
    cutoff = spec.modes[excited_mode].fock_cutoff
    if photon_numbers and max(photon_numbers) >= cutoff:
        raise ValueError(
            f"largest Fock number {max(photon_numbers)} needs cutoff > {max(photon_numbers)}, got {cutoff}"
        )
    scenarios = [
        default_scenario(t_rise, ModeFock(excited_mode, n), sample_spacing) for n in photon_numbers
    ]
    trajectories = _run_rows(spec, scenarios, jobs, integrator, step_limit, norm_tolerance)
    metadata = _bookkeeping(
        {"excited_mode": excited_mode, "coupling_model": spec.coupling_model.value},
        trajectories,
    )
    return FockScan(
        photon_numbers=photon_numbers,
        times=trajectories[0].times,
        populations=[_checked_clamp(t.observables["qubit_population"]) for t in trajectories],
        metadata=metadata,
    )


def single_excitation_reference(spec: SystemSpec, scenario: SweepScenario) -> tuple[np.ndarray, np.ndarray]:
    """Independent dense propagation restricted to the one-excitation sector.

    Builds the (N+1)-dimensional Hamiltonian directly from the spec scalars
    (basis: excited qubit + vacuum, then one photon in each mode) and
    integrates it with an adaptive high-order Runge-Kutta scheme.  Serves as
    the brute-force equivalence oracle for the full tensor-product evolution.
    """
    init = scenario.initial_state
    n_modes = len(spec.modes)
    psi0 = np.zeros(n_modes + 1, dtype=np.complex128)
    if isinstance(init, QubitExcited):
        psi0[0] = 1.0
    elif isinstance(init, ModeFock) and init.n == 1:
        psi0[1 + init.mode_index] = 1.0
    else:
        raise ValueError(f"initial state {init!r} is not in the single-excitation sector")

    omega_ref = frame_reference(spec, scenario)
    v = sweep_velocity(spec, scenario)
    g = spec.couplings
    omega_m = spec.mode_frequencies

    h0 = np.zeros((n_modes + 1, n_modes + 1), dtype=np.complex128)
    h0[0, 0] = 0.5 * (spec.omega_i - omega_ref)
    for k in range(n_modes):
        h0[k + 1, k + 1] = -0.5 * (spec.omega_i - omega_ref) + (omega_m[k] - omega_ref)
        h0[0, k + 1] = h0[k + 1, 0] = g[k]
    h1 = np.zeros_like(h0)
    h1[0, 0] = 0.5 * v
    for k in range(n_modes):
        h1[k + 1, k + 1] = -0.5 * v

    def rhs(t, y):
        return -1j * ((h0 + t * h1) @ y)

    times = scenario.sample_times()
    sol = solve_ivp(
        rhs, (0.0, scenario.t_rise), psi0, t_eval=times,
        method="DOP853", rtol=1e-11, atol=1e-13,
    )
    if not sol.success:
        raise SimulationError(f"reference integration failed: {sol.message}")
    return times, np.abs(sol.y[0]) ** 2


def coupling_weighted_mode_frequency(spec: SystemSpec) -> float:
    """Ensemble frequency used for the post-transit beat prediction.

    Weighted mean of the mode frequencies with weights g_n^2 (the
    energy-transfer weight of each crossing).
    """
    g2 = spec.couplings**2
    return float(np.sum(g2 * spec.mode_frequencies) / np.sum(g2))


def oscillation_onset(times: np.ndarray, populations: np.ndarray) -> float:
    """First time the population reaches half of its trace-wide maximum."""
    peak = float(np.max(populations))
    if peak <= 100 * POPULATION_SLACK:
        return math.nan
    idx = int(np.argmax(populations >= 0.5 * peak))
    return float(times[idx])


def _odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def _windowed_peak_frequency(t_win: np.ndarray, seg: np.ndarray, dt: float) -> float:
    # local quadratic detrend, Hann window, zero-padded FFT, parabolic peak
    center = t_win - t_win[len(t_win) // 2]
    seg = seg - np.polynomial.polynomial.polyval(
        center, np.polynomial.polynomial.polyfit(center, seg, 2)
    )
    spectrum = np.abs(np.fft.rfft(seg * np.hanning(len(seg)), 16 * len(seg)))
    freqs = np.fft.rfftfreq(16 * len(seg), dt)
    k = int(np.argmax(spectrum[1:])) + 1
    shift = 0.0
    if 1 <= k < len(spectrum) - 1:
        denom = spectrum[k - 1] - 2 * spectrum[k] + spectrum[k + 1]
        if denom != 0:
            shift = 0.5 * (spectrum[k - 1] - spectrum[k + 1]) / denom
    return 2.0 * math.pi * (freqs[k] + shift * (freqs[1] - freqs[0]))


def instantaneous_frequency(
    times: np.ndarray,
    values: np.ndarray,
    periods_per_window: float = 3.0,
    min_window_samples: int = 12,
):
    """Instantaneous angular frequency of an oscillatory trace.

    Windowed spectral analysis: a cubic fit removes the slow envelope, the
    residual's zero crossings give a local period estimate, and sliding
    Hann-windowed FFT peaks (window span = a few local periods) track the
    dominant frequency.  Returns (centers, omega) for all window positions
    that fit inside the trace.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise ValueError("instantaneous_frequency requires a uniform time grid")
    n = len(values)
    coarse = np.polynomial.polynomial.polyfit(times, values, 3)
    rough = values - np.polynomial.polynomial.polyval(times, coarse)
    scale = max(float(np.ptp(values)), 1e-300)
    if float(np.ptp(rough)) <= 1e-7 * scale:
        raise InsufficientOscillationsError("trace carries no oscillation above the trend")
    crossings = np.nonzero(np.diff(np.signbit(rough)))[0]
    if len(crossings) < 4:
        raise InsufficientOscillationsError(
            f"only {len(crossings)} zero crossings in the analysis window"
        )
    # local period from consecutive crossing spacings, interpolated over t
    mid = times[crossings[:-1]] + 0.5 * dt * np.diff(crossings)
    period = np.interp(times, mid, 2.0 * dt * np.diff(crossings))

    centers, omega = [], []
    for i in range(n):
        half = 0.5 * max(periods_per_window * period[i], min_window_samples * dt)
        lo, hi = times[i] - half, times[i] + half
        if lo < times[0] - 1e-9 or hi > times[-1] + 1e-9:
            continue
        sel = (times >= lo - 1e-9) & (times <= hi + 1e-9)
        centers.append(times[i])
        omega.append(_windowed_peak_frequency(times[sel], values[sel], dt))
    if len(centers) < 5:
        raise InsufficientOscillationsError(
            "trace too short for the requested spectral windows"
        )
    centers = np.asarray(centers)
    omega = np.asarray(omega)
    smooth = _odd(min(9, max(5, len(omega) // 3)))
    if smooth < len(omega):
        omega = scipy.signal.savgol_filter(omega, smooth, 2, mode="interp")
    return centers, omega


def stueckelberg_frequency_check(
    times: np.ndarray,
    populations: np.ndarray,
    spec: SystemSpec,
    scenario: SweepScenario,
    window: tuple[float, float] | None = None,
    min_cycles: float = 5.0,
) -> dict:
    """Compare the post-transit beat frequency against |omega_q(t) - omega_ens|.

    The coherent oscillations after the ensemble transit beat at the
    instantaneous detuning between the swept level and the ensemble, so
    their frequency chirps up linearly with t.
    """
    v = sweep_velocity(spec, scenario)
    omega_ens = coupling_weighted_mode_frequency(spec)
    t_cross = (omega_ens - spec.omega_i) / v
    if window is None:
        # start late enough that the slowest local period fits ~3 times into
        # the remaining trace: s^2 - L*s + 6*pi/v = 0 with L = t_rise - t_cross
        length = scenario.t_rise - t_cross
        disc = length**2 - 24.0 * math.pi / v
        if disc <= 0:
            raise InsufficientOscillationsError(
                "trace ends too soon after the ensemble transit for a frequency analysis"
            )
        window = (t_cross + 0.5 * (length - math.sqrt(disc)), scenario.t_rise)
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if np.count_nonzero(mask) < 16:
        raise InsufficientOscillationsError("analysis window holds too few samples")
    predicted_cycles = abs(
        0.5 * v * ((hi - t_cross) ** 2 - (max(lo, t_cross) - t_cross) ** 2)
    ) / (2 * math.pi)
    if predicted_cycles < min_cycles:
        raise InsufficientOscillationsError(
            f"window predicts {predicted_cycles:.1f} oscillation cycles (< {min_cycles})"
        )
    t_eval, measured = instantaneous_frequency(times[mask], populations[mask])
    predicted = np.abs(qubit_frequency(spec, scenario, t_eval) - omega_ens)
    rel_error = np.abs(measured - predicted) / predicted
    return {
        "window": (float(lo), float(hi)),
        "times": t_eval,
        "measured_omega": measured,
        "predicted_omega": predicted,
        "max_relative_error": float(np.max(rel_error)),
        "monotone_increasing": bool(np.all(np.diff(measured) > 0)),
        "omega_ensemble": omega_ens,
        "ensemble_weighting": "coupling-squared mean of mode frequencies",
        "predicted_cycles": float(predicted_cycles),
    }


@dataclass
class CalibrationFit:
    """Recovered (time, frequency) offset between two population maps."""

    delta_t_ns: float
    delta_f_ghz: float
    mse: float
    n_points: int
    search: dict = field(default_factory=dict)


def shift_population_map(pmap: PopulationMap, delta_t_ns: float, delta_f_ghz: float) -> PopulationMap:
    """Resample a map as if its clock ran late by delta_t and its frequency
    axis sat high by delta_f (rows keep their grids; edges are held)."""
    shifted = []
    for r, (t, p) in enumerate(zip(pmap.times, pmap.populations)):
        delta_row = delta_t_ns + 2.0 * math.pi * delta_f_ghz / pmap.velocity(r)
        shifted.append(np.interp(t - delta_row, t, p))
    return PopulationMap(
        rise_times=pmap.rise_times.copy(),
        times=[t.copy() for t in pmap.times],
        populations=shifted,
        omega_i=pmap.omega_i,
        omega_f=pmap.omega_f,
        metadata=dict(pmap.metadata, shifted_by=(delta_t_ns, delta_f_ghz)),
    )


def calibrate_offset(
    map_a: PopulationMap,
    map_b: PopulationMap,
    dt_window_ns: tuple[float, float] = (-5.0, 5.0),
    df_window_mhz: tuple[float, float] = (-3.0, 3.0),
    dt_step_ns: float = 0.1,
    df_step_mhz: float = 0.1,
) -> CalibrationFit:
    """Grid-search the (delta_t, delta_f) shift of map_a minimizing the mean
    squared error against map_b over their overlapping grid."""
    rows_a, rows_b = [], []
    for i, tr in enumerate(map_a.rise_times):
        match = np.nonzero(np.isclose(map_b.rise_times, tr))[0]
        if match.size:
            rows_a.append(i)
            rows_b.append(int(match[0]))
    if not rows_a:
        raise ValueError("maps share no rise times; nothing to align")

    def grid(window, step):
        count = int(round((window[1] - window[0]) / step)) + 1
        points = np.linspace(window[0], window[1], max(count, 1))
        points[np.abs(points) < 1e-12] = 0.0
        return points

    dts = grid(dt_window_ns, dt_step_ns)
    dfs_mhz = grid(df_window_mhz, df_step_mhz)

    best = (math.inf, 0.0, 0.0, 0)
    for df_mhz in dfs_mhz:
        df_ghz = 1e-3 * df_mhz
        for dt in dts:
            sq_sum, count = 0.0, 0
            for ia, ib in zip(rows_a, rows_b):
                t_b, p_b = map_b.times[ib], map_b.populations[ib]
                t_a, p_a = map_a.times[ia], map_a.populations[ia]
                delta_row = dt + 2.0 * math.pi * df_ghz / map_a.velocity(ia)
                t_src = t_b - delta_row
                valid = (t_src >= t_a[0]) & (t_src <= t_a[-1])
                if not np.any(valid):
                    continue
                resampled = np.interp(t_src[valid], t_a, p_a)
                diff = resampled - p_b[valid]
                sq_sum += float(np.dot(diff, diff))
                count += int(np.count_nonzero(valid))
            if count == 0:
                continue
            mse = sq_sum / count
            if mse < best[0]:
                best = (mse, float(dt), df_ghz, count)
    if not math.isfinite(best[0]):
        raise ValueError("shift windows leave no overlapping samples")
    return CalibrationFit(
        delta_t_ns=best[1],
        delta_f_ghz=best[2],
        mse=best[0],
        n_points=best[3],
        search={
            "dt_window_ns": tuple(dt_window_ns),
            "df_window_mhz": tuple(df_window_mhz),
            "dt_step_ns": dt_step_ns,
            "df_step_mhz": df_step_mhz,
        },
    )
