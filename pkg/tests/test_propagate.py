"""Propagation accuracy, unitarity and the single-excitation equivalence oracle."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

import mslz
from mslz.hilbert import TWO_PI, CouplingModel, SystemSpec, build_layout, qubit_operator
from mslz.lzmodel import ModeFock, QubitExcited, SweepScenario, default_scenario
from mslz.propagate import (
    NormDriftError,
    StepUnderflowError,
    default_step_limit,
    evolve,
    step_integrator,
)
from mslz.protocol import single_excitation_reference


def projector(spec):
    return qubit_operator("excited_projector", build_layout(spec))


def test_decoupled_qubit_stays_excited():
    spec = SystemSpec.from_ghz(5.3, 5.7, [5.5], [0.0], 2)
    traj = evolve(spec, default_scenario(30.0, QubitExcited()), {"pq": projector(spec)})
    assert np.max(np.abs(traj.observables["pq"] - 1.0)) < 1e-12


def test_vacuum_rabi_oscillation():
    # constant resonance: P_e(t) = cos^2(g t); a vanishing sweep span keeps
    # the scenario valid while leaving the dynamics effectively static
    g = TWO_PI * 0.0146
    spec = SystemSpec.from_ghz(5.507, 5.507 + 1e-12, [5.507], [14.6], 2)
    traj = evolve(spec, SweepScenario(40.0, 81, QubitExcited()), {"pq": projector(spec)})
    expected = np.cos(g * traj.times) ** 2
    assert np.max(np.abs(traj.observables["pq"] - expected)) < 1e-6


@pytest.mark.parametrize("exponent", [math.log(2.0), 1.0, 3.0])
def test_two_state_lz_transfer(exponent):
    # symmetric wide sweep through a single crossing; final survival must
    # approach exp(-2 pi g^2 / v) and agree with a 10x finer reference run
    g = TWO_PI * 0.0146
    center = TWO_PI * 5.507
    v = TWO_PI * g**2 / exponent
    span = 300.0 * g
    t_rise = span / v
    spec = SystemSpec.from_ghz(
        (center - span / 2) / TWO_PI, (center + span / 2) / TWO_PI, [5.507], [14.6], 2
    )
    sc = default_scenario(t_rise, QubitExcited())
    traj = evolve(spec, sc, {"pq": projector(spec)})
    survival = traj.observables["pq"][-1]
    assert survival == pytest.approx(math.exp(-exponent), abs=0.02)

    h0, h1 = mslz.hamiltonian_terms(spec, sc)
    fine = evolve(
        spec, sc, {"pq": projector(spec)}, step_limit=default_step_limit(h0, h1, t_rise) / 10.0
    )
    assert survival == pytest.approx(fine.observables["pq"][-1], abs=1e-6)


def test_step_integrator_zero_hamiltonian_is_identity():
    h = sp.csr_matrix((6, 6), dtype=complex)
    psi = np.arange(1.0, 7.0) / np.linalg.norm(np.arange(1.0, 7.0))
    out = step_integrator(h, psi.astype(complex), 0.37)
    assert np.allclose(out, psi, atol=1e-15)


def test_step_integrator_diagonal_phases():
    energies = np.array([0.3, -1.2, 2.5])
    h = sp.diags(energies).tocsr()
    psi = np.full(3, 1 / math.sqrt(3), dtype=complex)
    dt = 0.8
    out = step_integrator(h, psi, dt)
    assert np.allclose(out, psi * np.exp(-1j * energies * dt), atol=1e-12)


@pytest.mark.parametrize("dim", [32, 400])
def test_step_integrator_preserves_norm(dim):
    # dim spans both the dense-expm and the sparse Taylor-application paths
    rng = np.random.default_rng(5)
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = sp.csr_matrix((mat + mat.conj().T) / (2 * math.sqrt(dim)))
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    out = step_integrator(h, psi, 0.05)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_step_integrator_rejects_bad_dt():
    h = sp.identity(4, format="csr", dtype=complex)
    with pytest.raises(ValueError):
        step_integrator(h, np.ones(4, dtype=complex), 0.0)


@pytest.mark.parametrize("integrator,order", [("midpoint", 2.0), ("magnus4", 4.0)])
def test_convergence_order(integrator, order):
    spec = SystemSpec.from_ghz(5.407, 5.607, [5.507], [14.6], 2)
    sc = SweepScenario(20.0, 3, QubitExcited())

    def final_state(step):
        return evolve(spec, sc, {}, integrator=integrator, step_limit=step, keep_states=True).states[-1]

    reference = evolve(
        spec, sc, {}, integrator="magnus4", step_limit=0.002, keep_states=True
    ).states[-1]
    steps = [0.4, 0.2, 0.1]
    errors = [np.linalg.norm(final_state(s) - reference) for s in steps]
    slopes = [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    measured = np.mean(slopes)
    assert measured == pytest.approx(order, rel=0.2)


@pytest.mark.parametrize("t_rise", [20.0, 80.0])
@pytest.mark.parametrize(
    "initial", [QubitExcited(), ModeFock(0, 1), ModeFock(3, 1)]
)
def test_single_excitation_oracle_equivalence(four_mode_spec, t_rise, initial):
    # full 32-dimensional evolution vs the independent dense sector propagation
    sc = default_scenario(t_rise, initial)
    traj = evolve(four_mode_spec, sc, {"pq": projector(four_mode_spec)})
    _, reference = single_excitation_reference(four_mode_spec, sc)
    assert np.max(np.abs(traj.observables["pq"] - reference)) < 1e-6


def test_norm_and_excitation_conservation(four_mode_spec):
    layout = build_layout(four_mode_spec)
    sc = default_scenario(150.0, QubitExcited())
    traj = evolve(
        four_mode_spec, sc, {"n_total": mslz.excitation_number_operator(layout)}
    )
    assert traj.norm_drift <= 1e-8
    n = traj.observables["n_total"]
    assert np.max(np.abs(n - n[0])) <= 1e-8


def test_rwa_full_consistency_single_excitation():
    # cutoff 4 keeps counter-rotating pathways open (cutoff 2 truncates them
    # away exactly); corrections are O(g/omega)^2 and far below 1e-2
    args = (5.457, 5.557, [5.507], [14.6], 4)
    spec_rwa = SystemSpec.from_ghz(*args, CouplingModel.RWA)
    spec_full = SystemSpec.from_ghz(*args, CouplingModel.FULL)
    sc = default_scenario(10.0, QubitExcited())
    p_rwa = evolve(spec_rwa, sc, {"pq": projector(spec_rwa)}).observables["pq"][-1]
    p_full = evolve(spec_full, sc, {"pq": projector(spec_full)}).observables["pq"][-1]
    assert p_rwa == pytest.approx(p_full, abs=1e-2)
    assert p_rwa != p_full  # the models genuinely differ at this cutoff


def test_norm_drift_guard_triggers(four_mode_spec):
    with pytest.raises(NormDriftError):
        evolve(
            four_mode_spec,
            default_scenario(20.0, QubitExcited()),
            norm_tolerance=1e-18,
        )


def test_step_underflow_guard(four_mode_spec):
    with pytest.raises(StepUnderflowError):
        evolve(
            four_mode_spec,
            default_scenario(100.0, QubitExcited()),
            step_limit=1e-7,
        )


def test_keep_states_shape_and_initial(four_mode_spec):
    sc = default_scenario(10.0, ModeFock(2, 1))
    traj = evolve(four_mode_spec, sc, {}, keep_states=True)
    assert traj.states.shape == (len(traj.times), 32)
    layout = build_layout(four_mode_spec)
    assert traj.states[0][layout.index_of(0, (0, 0, 1, 0))] == 1.0
