"""Time evolution of pure states under the affine-in-time sweep Hamiltonian.

The default scheme is a piecewise exponential-midpoint rule: each internal
step applies expm(-i * dt * H(t_mid)), which is exactly unitary, so norm
conservation holds to rounding regardless of step size.  Because H(t) is
affine in t the midpoint rule is second-order accurate; the optional
"magnus4" scheme adds the commutator correction -dt^3/12 * [H1, H0] to the
step generator, which for affine H gives the classical fourth-order scheme
at essentially the same cost per step.

Dense matrix exponentials are used up to ``DENSE_THRESHOLD``; above that the
propagator applies a scaled truncated-Taylor expansion of the generator to
the state vector.  The Taylor path uses the exact sparse 1-norm for scaling
(no randomized norm estimate), keeping runs bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .hilbert import SystemSpec, build_layout
from .lzmodel import QuantumState, SweepScenario, hamiltonian_terms, prepare_state

DENSE_THRESHOLD = 256
DEFAULT_NORM_TOLERANCE = 1e-8
MAX_TOTAL_STEPS = 5_000_000

#: Default internal step: min(0.05 / |H|, t_rise / 2000).
STEP_PHASE_BUDGET = 0.05
STEP_RISE_FRACTION = 1.0 / 2000.0


class SimulationError(RuntimeError):
    """Base class for numerical failures during propagation or analysis."""


class NormDriftError(SimulationError):
    """State norm drifted beyond the configured tolerance."""


class StepUnderflowError(SimulationError):
    """The requested accuracy forces an impractically small step size."""


@dataclass
class Trajectory:
    """Sampled observables of one propagated sweep."""

    times: np.ndarray
    observables: dict[str, np.ndarray]
    norms: np.ndarray
    states: np.ndarray | None = None

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))


def _inf_norm(matrix: sp.spmatrix) -> float:
    if matrix.nnz == 0:
        return 0.0
    return float(np.max(np.abs(matrix).sum(axis=1)))


def default_step_limit(h0: sp.spmatrix, h1: sp.spmatrix, t_rise: float) -> float:
    """Internal step bound from the Hamiltonian scale and the rise time."""
    h_end = (h0 + t_rise * h1).tocsr()
    norm_est = max(_inf_norm(h0), _inf_norm(h_end))
    phase_limited = STEP_PHASE_BUDGET / norm_est if norm_est > 0 else math.inf
    return min(phase_limited, t_rise * STEP_RISE_FRACTION)


def _expm_apply_sparse(generator: sp.csr_matrix, vec: np.ndarray) -> np.ndarray:
    """Apply expm(generator) to vec via scaled truncated Taylor series.

    Scaling uses the exact 1-norm, so the result is deterministic for
    identical inputs.  Intended for generators with norm O(0.1) per step.
    """
    norm1 = float(np.max(np.abs(generator).sum(axis=0))) if generator.nnz else 0.0
    squarings = max(1, int(math.ceil(norm1 / 0.5)))
    scaled = generator * (1.0 / squarings)
    out = vec
    for _ in range(squarings):
        term = out
        acc = out.copy()
        for k in range(1, 64):
            term = scaled @ term
            term /= k
            acc += term
            if np.linalg.norm(term) <= 1e-16 * np.linalg.norm(acc):
                break
        out = acc
    return out


def step_integrator(
    h_mid,
    state: np.ndarray,
    dt: float,
    generator_extra=None,
    dense_threshold: int = DENSE_THRESHOLD,
) -> np.ndarray:
    """One exponential step: expm(-i*dt*H_mid [+ extra]) applied to state.

    ``generator_extra`` is an optional anti-Hermitian addition to the step
    generator (used for the fourth-order commutator correction).
    """
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    dim = state.shape[0]
    if dim <= dense_threshold:
        gen = (-1j * dt) * (h_mid.toarray() if sp.issparse(h_mid) else np.asarray(h_mid))
        if generator_extra is not None:
            gen = gen + (generator_extra.toarray() if sp.issparse(generator_extra) else generator_extra)
        return scipy.linalg.expm(gen) @ state
    gen = (-1j * dt) * h_mid.tocsr()
    if generator_extra is not None:
        gen = (gen + generator_extra).tocsr()
    return _expm_apply_sparse(gen, state)


def evolve(
    spec: SystemSpec,
    scenario: SweepScenario,
    observables: dict[str, sp.spmatrix] | None = None,
    *,
    integrator: str = "midpoint",
    keep_states: bool = False,
    step_limit: float | None = None,
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE,
    dense_threshold: int = DENSE_THRESHOLD,
    initial: QuantumState | None = None,
) -> Trajectory:
    """Integrate i d|psi>/dt = H(t)|psi> over [0, t_rise] and sample observables.

    Returns expectation values of each observable on the scenario's sample
    grid.  Raises NormDriftError if unitarity is lost beyond
    ``norm_tolerance`` and StepUnderflowError if the required number of
    internal steps is impractical.
    """
    if integrator not in ("midpoint", "magnus4"):
        raise ValueError(f"unknown integrator {integrator!r}")
    layout = build_layout(spec)
    state = prepare_state(spec, scenario, layout) if initial is None else initial
    psi = np.array(state.amplitudes, dtype=np.complex128, copy=True)

    h0, h1 = hamiltonian_terms(spec, scenario, layout)
    limit = default_step_limit(h0, h1, scenario.t_rise) if step_limit is None else step_limit
    if not limit > 0:
        raise ValueError("step limit must be positive")

    times = scenario.sample_times()
    estimated_steps = int(np.sum(np.ceil(np.diff(times) / limit)))
    if estimated_steps > MAX_TOTAL_STEPS:
        raise StepUnderflowError(
            f"propagation would need {estimated_steps} steps (> {MAX_TOTAL_STEPS}); "
            "the Hamiltonian is too stiff for the configured step budget"
        )

    dense = layout.dim <= dense_threshold
    if dense:
        h0_op, h1_op = h0.toarray(), h1.toarray()
    else:
        h0_op, h1_op = h0, h1
    comm_factor = None
    if integrator == "magnus4":
        comm = (h1 @ h0 - h0 @ h1).tocsr()
        comm_factor = comm.toarray() if dense else comm

    obs = dict(observables or {})
    records = {name: np.empty(len(times)) for name in obs}
    norms = np.empty(len(times))
    states = np.empty((len(times), layout.dim), dtype=np.complex128) if keep_states else None

    def record(i, vec):
        norms[i] = float(np.linalg.norm(vec))
        for name, op in obs.items():
            records[name][i] = float(np.real(np.vdot(vec, op @ vec)))
        if states is not None:
            states[i] = vec

    record(0, psi)
    for i in range(1, len(times)):
        t_a, t_b = times[i - 1], times[i]
        n_sub = max(1, int(math.ceil((t_b - t_a) / limit)))
        h = (t_b - t_a) / n_sub
        extra = None
        if comm_factor is not None:
            extra = (-(h**3) / 12.0) * comm_factor
        for j in range(n_sub):
            t_mid = t_a + (j + 0.5) * h
            h_mid = h0_op + t_mid * h1_op
            psi = step_integrator(h_mid, psi, h, generator_extra=extra, dense_threshold=dense_threshold)
        record(i, psi)

    traj = Trajectory(times=times, observables=records, norms=norms, states=states)
    if traj.norm_drift > norm_tolerance:
        raise NormDriftError(
            f"norm drifted by {traj.norm_drift:.3e} (tolerance {norm_tolerance:.1e})"
        )
    return traj
