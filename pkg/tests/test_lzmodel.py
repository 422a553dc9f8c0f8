"""Sweep Hamiltonian assembly and initial-state preparation."""

import numpy as np
import pytest

from mslz.hilbert import TWO_PI, CouplingModel, SystemSpec, build_layout
from mslz.lzmodel import (
    Ground,
    ModeCoherent,
    ModeFock,
    QubitExcited,
    SweepScenario,
    default_scenario,
    excitation_number_operator,
    frame_reference,
    hamiltonian_at,
    hamiltonian_terms,
    prepare_state,
    qubit_frequency,
    sweep_velocity,
)


def test_scenario_validation():
    with pytest.raises(ValueError):
        SweepScenario(t_rise=0.0, n_time_samples=10)
    with pytest.raises(ValueError):
        SweepScenario(t_rise=10.0, n_time_samples=1)


def test_sweep_law_affine_and_exact_endpoint(four_mode_spec):
    sc = default_scenario(150.0)
    v = sweep_velocity(four_mode_spec, sc)
    assert qubit_frequency(four_mode_spec, sc, 150.0) == four_mode_spec.omega_f
    assert qubit_frequency(four_mode_spec, sc, 0.0) == four_mode_spec.omega_i
    # affine: second difference vanishes
    w = qubit_frequency(four_mode_spec, sc, np.array([10.0, 60.0, 110.0]))
    assert w[2] - w[1] == pytest.approx(w[1] - w[0], rel=1e-12)
    assert v == pytest.approx((four_mode_spec.omega_f - four_mode_spec.omega_i) / 150.0)


def test_start_detuning_matches_defaults(four_mode_spec):
    # qubit starts 200 MHz below the lowest ensemble mode
    sc = default_scenario(100.0)
    detuning = qubit_frequency(four_mode_spec, sc, 0.0) - four_mode_spec.modes[0].frequency
    assert detuning == pytest.approx(-TWO_PI * 0.2, rel=1e-12)


def test_uncoupled_hamiltonian_is_diagonal():
    spec = SystemSpec.from_ghz(5.3, 5.7, [5.5, 5.52], [0.0, 0.0], 3)
    sc = default_scenario(20.0)
    h = hamiltonian_at(7.3, spec, sc).toarray()
    assert np.max(np.abs(h - np.diag(np.diag(h)))) == 0.0


def test_resonant_single_excitation_block(single_mode_spec):
    # when the qubit crosses the mode, the one-excitation block is [[0, g], [g, 0]]
    # up to the common frame shift on its diagonal
    sc = default_scenario(100.0)
    v = sweep_velocity(single_mode_spec, sc)
    t_cross = (single_mode_spec.modes[0].frequency - single_mode_spec.omega_i) / v
    layout = build_layout(single_mode_spec)
    h = hamiltonian_at(t_cross, single_mode_spec, sc).toarray()
    i_e0 = layout.index_of(1, (0,))
    i_g1 = layout.index_of(0, (1,))
    g = single_mode_spec.modes[0].coupling
    assert h[i_e0, i_g1] == pytest.approx(g, rel=1e-12)
    assert h[i_e0, i_e0] == pytest.approx(h[i_g1, i_g1], abs=1e-12)


def test_hamiltonian_hermitian_at_random_times(four_mode_spec):
    rng = np.random.default_rng(7)
    for model in (CouplingModel.RWA, CouplingModel.FULL):
        spec = SystemSpec(
            four_mode_spec.omega_i, four_mode_spec.omega_f, four_mode_spec.modes, model
        )
        sc = default_scenario(80.0)
        for t in rng.uniform(0.0, 80.0, size=100):
            h = hamiltonian_at(float(t), spec, sc)
            assert np.max(np.abs((h - h.conjugate().transpose()).toarray())) == 0.0


def test_time_outside_window_rejected(four_mode_spec):
    sc = default_scenario(50.0)
    with pytest.raises(ValueError):
        hamiltonian_at(-0.1, four_mode_spec, sc)
    with pytest.raises(ValueError):
        hamiltonian_at(50.1, four_mode_spec, sc)


def test_full_model_uses_lab_frame(four_mode_spec):
    spec = SystemSpec(
        four_mode_spec.omega_i, four_mode_spec.omega_f, four_mode_spec.modes, CouplingModel.FULL
    )
    sc = default_scenario(50.0)
    assert frame_reference(spec, sc) == 0.0
    layout = build_layout(spec)
    h = hamiltonian_at(0.0, spec, sc).toarray()
    i_g1 = layout.index_of(0, (1, 0, 0, 0))
    # absolute mode frequency on the diagonal, minus half the bare qubit energy
    expected = spec.modes[0].frequency - 0.5 * spec.omega_i
    assert h[i_g1, i_g1] == pytest.approx(expected, rel=1e-12)


def test_excitation_operator_eigenvalues(four_mode_spec):
    layout = build_layout(four_mode_spec)
    n_op = excitation_number_operator(layout).toarray()
    i = layout.index_of(1, (0, 0, 0, 0))
    assert n_op[i, i] == 1.0
    spec = SystemSpec.from_ghz(5.3, 5.7, [5.5], [10.0], 5)
    layout = build_layout(spec)
    n_op = excitation_number_operator(layout).toarray()
    j = layout.index_of(0, (3,))
    assert n_op[j, j] == pytest.approx(3.0, abs=1e-12)


def test_excitation_commutes_with_rwa_hamiltonian(four_mode_spec):
    rng = np.random.default_rng(21)
    layout = build_layout(four_mode_spec)
    n_op = excitation_number_operator(layout)
    sc = default_scenario(60.0)
    for t in rng.uniform(0.0, 60.0, size=20):
        h = hamiltonian_at(float(t), four_mode_spec, sc)
        comm = n_op @ h - h @ n_op
        assert np.max(np.abs(comm.toarray())) < 1e-12


def test_terms_reassemble_hamiltonian(four_mode_spec):
    sc = default_scenario(40.0)
    h0, h1 = hamiltonian_terms(four_mode_spec, sc)
    t = 17.0
    direct = hamiltonian_at(t, four_mode_spec, sc)
    assert np.max(np.abs((h0 + t * h1 - direct).toarray())) < 1e-14


def test_prepare_ground_and_excited(four_mode_spec):
    layout = build_layout(four_mode_spec)
    state = prepare_state(four_mode_spec, default_scenario(10.0, Ground()), layout)
    assert state.amplitudes[layout.index_of(0, (0, 0, 0, 0))] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1
    state = prepare_state(four_mode_spec, default_scenario(10.0, QubitExcited()), layout)
    assert state.amplitudes[layout.index_of(1, (0, 0, 0, 0))] == 1.0


def test_prepare_mode_fock_single_amplitude(four_mode_spec):
    layout = build_layout(four_mode_spec)
    state = prepare_state(four_mode_spec, default_scenario(10.0, ModeFock(1, 1)), layout)
    assert np.count_nonzero(state.amplitudes) == 1
    assert state.amplitudes[layout.index_of(0, (0, 1, 0, 0))] == 1.0


def test_prepare_fock_above_cutoff_rejected(four_mode_spec):
    with pytest.raises(ValueError):
        prepare_state(four_mode_spec, default_scenario(10.0, ModeFock(0, 2)))


def test_prepare_coherent_occupation():
    spec = SystemSpec.from_ghz(5.3, 5.7, [5.5, 5.52], [10.0, 10.0], [20, 2])
    layout = build_layout(spec)
    state = prepare_state(spec, default_scenario(10.0, ModeCoherent(0, 1.0)), layout)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
    occ = layout.occupations[:, 0]
    mean_n = float(np.sum(occ * np.abs(state.amplitudes) ** 2))
    assert mean_n == pytest.approx(1.0, abs=1e-6)


def test_prepare_coherent_tail_rejected():
    spec = SystemSpec.from_ghz(5.3, 5.7, [5.5], [10.0], 6)
    with pytest.raises(ValueError):
        prepare_state(spec, default_scenario(10.0, ModeCoherent(0, 3.5)))


@pytest.mark.parametrize(
    "initial",
    [Ground(), QubitExcited(), ModeFock(0, 1), ModeCoherent(0, 0.8)],
)
def test_prepared_states_normalized(initial):
    spec = SystemSpec.from_ghz(5.3, 5.7, [5.5], [10.0], 12)
    state = prepare_state(spec, default_scenario(10.0, initial))
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
