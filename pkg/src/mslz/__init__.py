"""Numerical emulator of a two-level system swept through a coupled bosonic
mode ensemble, with the surrounding waveform and readout calibration
arithmetic."""

__version__ = "0.1.0"

from .hilbert import (
    BasisLayout,
    CouplingModel,
    DimensionCapError,
    ModeSpec,
    SystemSpec,
    build_layout,
    mode_operator,
    qubit_operator,
)
from .lzmodel import (
    Ground,
    ModeCoherent,
    ModeFock,
    QuantumState,
    QubitExcited,
    SweepScenario,
    default_scenario,
    excitation_number_operator,
    hamiltonian_at,
    hamiltonian_terms,
    prepare_state,
    qubit_frequency,
    sweep_velocity,
)
from .propagate import (
    NormDriftError,
    SimulationError,
    StepUnderflowError,
    Trajectory,
    evolve,
    step_integrator,
)
from .protocol import (
    CalibrationFit,
    FockScan,
    LZCurve,
    PopulationMap,
    calibrate_offset,
    lz_formula,
    oscillation_onset,
    qubit_population,
    run_excited_mode_scan,
    run_excited_qubit_scan,
    run_fock_scan,
    run_population_map,
    single_excitation_reference,
    stueckelberg_frequency_check,
)
from .calib import (
    FitError,
    Waveform,
    biastee_fit_tau,
    biastee_highpass,
    biastee_predistort,
    clamp_population,
    iq_project,
)
from .config import ConfigError, RunConfig, default_config, load_config
