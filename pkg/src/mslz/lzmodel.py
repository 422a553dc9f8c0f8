"""Time-dependent Hamiltonian of the swept-qubit / mode-ensemble model.

The qubit frequency follows the linear law omega_q(t) = omega_i + v*t with
v = (omega_f - omega_i) / t_rise.  Two coupling treatments are supported:

* RWA (default): excitation-conserving coupling g*(sigma+ a + sigma- a^dag)
  in a rotating frame at a reference frequency (by default the mean mode
  frequency), which keeps the integration non-stiff.
* FULL: the literal lab-frame form g*sigma_x*(a^dag + a) with absolute
  frequencies, retained as a validation path.

Both forms are affine in t, H(t) = H0 + t*H1, which the propagator exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    BasisLayout,
    CouplingModel,
    SystemSpec,
    build_layout,
    mode_operator,
    qubit_operator,
)

#: Maximum probability weight allowed beyond the Fock truncation when
#: preparing a coherent state.
COHERENT_TAIL_MAX = 1e-6


@dataclass(frozen=True)
class Ground:
    """Qubit in |g>, all modes in vacuum."""


@dataclass(frozen=True)
class QubitExcited:
    """Qubit in |e>, all modes in vacuum."""


@dataclass(frozen=True)
class ModeFock:
    """Qubit in |g>, one mode prepared in Fock state |n>."""

    mode_index: int
    n: int


@dataclass(frozen=True)
class ModeCoherent:
    """Qubit in |g>, one mode prepared in a truncated coherent state."""

    mode_index: int
    amplitude: complex


InitialState = Union[Ground, QubitExcited, ModeFock, ModeCoherent]


@dataclass(frozen=True)
class SweepScenario:
    """One sweep run: rise time, observable sampling grid and initial state.

    ``frame_reference`` (rad/ns) fixes the rotating frame for the RWA form;
    ``None`` selects the mean mode frequency.  It is ignored in FULL mode,
    which always works in the lab frame.
    """

    t_rise: float
    n_time_samples: int
    initial_state: InitialState = QubitExcited()
    frame_reference: float | None = None

    def __post_init__(self):
        if not self.t_rise > 0:
            raise ValueError(f"t_rise must be positive, got {self.t_rise}")
        if self.n_time_samples < 2:
            raise ValueError(f"need at least 2 time samples, got {self.n_time_samples}")

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_rise, self.n_time_samples)


def default_scenario(
    t_rise: float,
    initial_state: InitialState = QubitExcited(),
    sample_spacing: float = 1.0,
    frame_reference: float | None = None,
) -> SweepScenario:
    """Scenario with ~1 ns observable sampling (the waveform-generator grid)."""
    n = max(2, int(round(t_rise / sample_spacing)) + 1)
    return SweepScenario(t_rise, n, initial_state, frame_reference)


def sweep_velocity(spec: SystemSpec, scenario: SweepScenario) -> float:
    """Landau-Zener velocity v = (omega_f - omega_i) / t_rise in rad/ns^2."""
    return (spec.omega_f - spec.omega_i) / scenario.t_rise


def qubit_frequency(spec: SystemSpec, scenario: SweepScenario, t) -> float:
    """Instantaneous qubit frequency omega_q(t) = omega_i + v*t."""
    return spec.omega_i + sweep_velocity(spec, scenario) * np.asarray(t)


def frame_reference(spec: SystemSpec, scenario: SweepScenario) -> float:
    if spec.coupling_model is CouplingModel.FULL:
        return 0.0
    if scenario.frame_reference is not None:
        return scenario.frame_reference
    return float(np.mean(spec.mode_frequencies))


def hamiltonian_terms(
    spec: SystemSpec, scenario: SweepScenario, layout: BasisLayout | None = None
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Split H(t) = H0 + t*H1 into its static and linear parts (both Hermitian)."""
    if layout is None:
        layout = build_layout(spec)
    v = sweep_velocity(spec, scenario)
    omega_ref = frame_reference(spec, scenario)
    sigma_z = qubit_operator("sigma_z", layout)

    h0 = (0.5 * (spec.omega_i - omega_ref)) * sigma_z
    for k, mode in enumerate(spec.modes):
        h0 = h0 + (mode.frequency - omega_ref) * mode_operator("number", k, layout)
        if mode.coupling != 0.0:
            if spec.coupling_model is CouplingModel.RWA:
                transfer = qubit_operator("sigma_plus", layout) @ mode_operator("lower", k, layout)
                h0 = h0 + mode.coupling * (transfer + transfer.conjugate().transpose())
            else:
                quad = mode_operator("lower", k, layout)
                quad = quad + quad.conjugate().transpose()
                h0 = h0 + mode.coupling * (qubit_operator("sigma_x", layout) @ quad)
    h1 = (0.5 * v) * sigma_z
    return h0.tocsr(), h1.tocsr()


def hamiltonian_at(
    t: float, spec: SystemSpec, scenario: SweepScenario, layout: BasisLayout | None = None
) -> sp.csr_matrix:
    """Hamiltonian at time t within the sweep window [0, t_rise]."""
    if not 0.0 <= t <= scenario.t_rise:
        raise ValueError(f"time {t} outside sweep window [0, {scenario.t_rise}]")
    h0, h1 = hamiltonian_terms(spec, scenario, layout)
    return (h0 + t * h1).tocsr()


def excitation_number_operator(layout: BasisLayout) -> sp.csr_matrix:
    """Total excitation number: excited-qubit projector plus all mode numbers.

    Commutes with the RWA Hamiltonian at every time, so it serves as a
    conservation diagnostic for the propagation.
    """
    total = qubit_operator("excited_projector", layout)
    for k in range(layout.n_modes):
        total = total + mode_operator("number", k, layout)
    return total.tocsr()


@dataclass
class QuantumState:
    """Complex amplitude vector over a basis layout, tagged with its time."""

    amplitudes: np.ndarray
    layout: BasisLayout
    time_stamp: float = 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    # c_m = exp(-|a|^2/2) a^m / sqrt(m!) on the retained levels
    if alpha == 0:
        coeff = np.zeros(cutoff, dtype=np.complex128)
        coeff[0] = 1.0
        return coeff
    m = np.arange(cutoff)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, cutoff)))])
    log_mag = -0.5 * abs(alpha) ** 2 + m * math.log(abs(alpha))
    coeff = np.exp(log_mag - 0.5 * log_fact) * np.exp(1j * m * np.angle(alpha))
    tail = 1.0 - float(np.sum(np.abs(coeff) ** 2))
    if tail > COHERENT_TAIL_MAX:
        raise ValueError(
            f"coherent amplitude {alpha} leaves weight {tail:.3e} beyond cutoff {cutoff}"
        )
    return coeff / np.linalg.norm(coeff)


def prepare_state(
    spec: SystemSpec, scenario: SweepScenario, layout: BasisLayout | None = None
) -> QuantumState:
    """Normalized initial state at t = 0 for the scenario's descriptor."""
    if layout is None:
        layout = build_layout(spec)
    init = scenario.initial_state
    amps = np.zeros(layout.dim, dtype=np.complex128)
    vacuum = (0,) * layout.n_modes
    if isinstance(init, Ground):
        amps[layout.index_of(0, vacuum)] = 1.0
    elif isinstance(init, QubitExcited):
        amps[layout.index_of(1, vacuum)] = 1.0
    elif isinstance(init, ModeFock):
        cutoff = layout.cutoffs[init.mode_index]
        if not 0 <= init.n < cutoff:
            raise ValueError(f"Fock number {init.n} outside cutoff {cutoff} of mode {init.mode_index}")
        occ = list(vacuum)
        occ[init.mode_index] = init.n
        amps[layout.index_of(0, occ)] = 1.0
    elif isinstance(init, ModeCoherent):
        cutoff = layout.cutoffs[init.mode_index]
        coeff = _coherent_amplitudes(complex(init.amplitude), cutoff)
        stride = layout.strides[init.mode_index]
        base = layout.index_of(0, vacuum)
        for m in range(cutoff):
            amps[base + m * stride] = coeff[m]
    else:
        raise ValueError(f"unknown initial state descriptor: {init!r}")
    return QuantumState(amps, layout, 0.0)
