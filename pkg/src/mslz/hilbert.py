"""Truncated tensor-product Hilbert space for a qubit coupled to bosonic modes.

Basis convention: a flat index enumerates states (q, m_1, ..., m_N) in C
order with the qubit level q in {0, 1} varying slowest and the last mode
varying fastest.  The excited-qubit block is therefore the contiguous upper
half of every state vector, which makes the qubit-population reduction a
single block sum.

Units: hbar = 1, angular frequencies in rad/ns, times in ns.  Public
configuration is written in GHz / MHz and converted once at the boundary
via omega = 2*pi*nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * math.pi

#: Hard ceiling on the total Hilbert-space dimension accepted by build_layout.
DEFAULT_DIMENSION_CAP = 2**20



def ghz_to_angular(frequency_ghz: float) -> float:
    """Ordinary frequency in GHz -> angular frequency in rad/ns."""
    return TWO_PI * frequency_ghz


def mhz_to_angular(frequency_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/ns."""
    return TWO_PI * 1e-3 * frequency_mhz


def angular_to_ghz(omega: float) -> float:
    """Angular frequency in rad/ns -> ordinary frequency in GHz."""
    return omega / TWO_PI


class CouplingModel(Enum):
    """Coupling treatment: rotating-wave approximation or the literal lab frame."""

    RWA = "rwa"
    FULL = "full"


@dataclass(frozen=True)
class ModeSpec:
    """One bosonic mode: frequency and qubit coupling (rad/ns), Fock truncation.

    ``fock_cutoff`` is the number of retained Fock levels, i.e. occupations
    0 .. fock_cutoff - 1.
    """

    frequency: float
    coupling: float
    fock_cutoff: int = 2

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"mode frequency must be positive, got {self.frequency}")
        if self.coupling < 0:
            raise ValueError(f"mode coupling must be >= 0, got {self.coupling}")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be an integer >= 2, got {self.fock_cutoff}")

    @classmethod
    def from_ghz(cls, frequency_ghz: float, coupling_mhz: float, fock_cutoff: int = 2) -> "ModeSpec":
        return cls(ghz_to_angular(frequency_ghz), mhz_to_angular(coupling_mhz), fock_cutoff)


@dataclass(frozen=True)
class SystemSpec:
    """Swept qubit plus an ordered ensemble of coupled bosonic modes.

    ``omega_i`` and ``omega_f`` are the qubit frequency at the start and end
    of the linear sweep (rad/ns).
    """

    omega_i: float
    omega_f: float
    modes: tuple[ModeSpec, ...]
    coupling_model: CouplingModel = CouplingModel.RWA

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("at least one mode is required")
        if not self.omega_f > self.omega_i:
            raise ValueError("omega_f must exceed omega_i (upward sweep)")
        if not isinstance(self.coupling_model, CouplingModel):
            raise ValueError(f"invalid coupling model: {self.coupling_model!r}")

    @property
    def dimension(self) -> int:
        d = 2
        for mode in self.modes:
            d *= mode.fock_cutoff
        return d

    @property
    def couplings(self) -> np.ndarray:
        return np.array([m.coupling for m in self.modes])

    @property
    def mode_frequencies(self) -> np.ndarray:
        return np.array([m.frequency for m in self.modes])

    @classmethod
    def from_ghz(
        cls,
        qubit_start_ghz: float,
        qubit_stop_ghz: float,
        mode_frequencies_ghz: Sequence[float],
        mode_couplings_mhz: Sequence[float],
        fock_cutoffs: Sequence[int] | int = 2,
        coupling_model: CouplingModel = CouplingModel.RWA,
    ) -> "SystemSpec":
        n = len(mode_frequencies_ghz)
        if len(mode_couplings_mhz) != n:
            raise ValueError("mode frequency and coupling lists must have equal length")
        if isinstance(fock_cutoffs, int):
            fock_cutoffs = [fock_cutoffs] * n
        if len(fock_cutoffs) != n:
            raise ValueError("fock cutoff list must match the number of modes")
        modes = tuple(
            ModeSpec.from_ghz(f, g, c)
            for f, g, c in zip(mode_frequencies_ghz, mode_couplings_mhz, fock_cutoffs)
        )
        return cls(ghz_to_angular(qubit_start_ghz), ghz_to_angular(qubit_stop_ghz), modes, coupling_model)


class DimensionCapError(ValueError):
    """Raised when the requested Hilbert space exceeds the configured cap."""


@dataclass(frozen=True)
class BasisLayout:
    """Bijective map between flat indices and (qubit level, occupations).

    The flat index is ``q * prod(cutoffs) + sum_k m_k * stride_k`` with
    stride_N = 1 (last mode fastest).  ``qubit_levels`` and ``occupations``
    are precomputed lookup tables over all dim states.
    """

    cutoffs: tuple[int, ...]
    dim: int = field(init=False)
    qubit_stride: int = field(init=False)
    strides: tuple[int, ...] = field(init=False)
    qubit_levels: np.ndarray = field(init=False, repr=False, compare=False)
    occupations: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        strides = []
        acc = 1
        for c in reversed(self.cutoffs):
            strides.append(acc)
            acc *= c
        strides.reverse()
        object.__setattr__(self, "strides", tuple(strides))
        object.__setattr__(self, "qubit_stride", acc)
        object.__setattr__(self, "dim", 2 * acc)
        idx = np.arange(self.dim)
        object.__setattr__(self, "qubit_levels", (idx // acc).astype(np.int64))
        occ = np.empty((self.dim, len(self.cutoffs)), dtype=np.int64)
        for k, (stride, cut) in enumerate(zip(self.strides, self.cutoffs)):
            occ[:, k] = (idx // stride) % cut
        occ.setflags(write=False)
        self.qubit_levels.setflags(write=False)
        object.__setattr__(self, "occupations", occ)

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    def index_of(self, qubit_level: int, occupations: Sequence[int]) -> int:
        if qubit_level not in (0, 1):
            raise ValueError(f"qubit level must be 0 or 1, got {qubit_level}")
        if len(occupations) != self.n_modes:
            raise ValueError("occupation tuple length does not match mode count")
        flat = qubit_level * self.qubit_stride
        for m, stride, cut in zip(occupations, self.strides, self.cutoffs):
            if not 0 <= m < cut:
                raise ValueError(f"occupation {m} outside [0, {cut})")
            flat += m * stride
        return flat

    def state_at(self, index: int) -> tuple[int, tuple[int, ...]]:
        if not 0 <= index < self.dim:
            raise ValueError(f"flat index {index} outside [0, {self.dim})")
        return int(self.qubit_levels[index]), tuple(int(m) for m in self.occupations[index])

    def states(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        for i in range(self.dim):
            yield self.state_at(i)


def build_layout(spec: SystemSpec, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> BasisLayout:
    """Enumerate the truncated basis of ``spec`` in canonical order."""
    dim = spec.dimension
    if dim > dimension_cap:
        raise DimensionCapError(
            f"Hilbert-space dimension {dim} exceeds cap {dimension_cap}"
        )
    return BasisLayout(tuple(m.fock_cutoff for m in spec.modes))


def _csr(rows, cols, data, dim) -> sp.csr_matrix:
    mat = sp.coo_matrix((data, (rows, cols)), shape=(dim, dim), dtype=np.complex128).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def mode_operator(kind: str, mode_index: int, layout: BasisLayout) -> sp.csr_matrix:
    """Embedded ladder operator for one mode: 'lower', 'raise' or 'number'.

    <m-1| a |m> = sqrt(m) on the retained levels; the raising operator is the
    exact conjugate transpose of the lowering one, and number = raise @ lower.
    """
    if not 0 <= mode_index < layout.n_modes:
        raise IndexError(f"mode index {mode_index} outside [0, {layout.n_modes})")
    if kind == "lower":
        occ = layout.occupations[:, mode_index]
        cols = np.nonzero(occ >= 1)[0]
        rows = cols - layout.strides[mode_index]
        data = np.sqrt(occ[cols].astype(float))
        return _csr(rows, cols, data, layout.dim)
    if kind == "raise":
        return mode_operator("lower", mode_index, layout).conjugate().transpose().tocsr()
    if kind == "number":
        lower = mode_operator("lower", mode_index, layout)
        return (lower.conjugate().transpose() @ lower).tocsr()
    raise ValueError(f"unknown mode operator kind: {kind!r}")


def qubit_operator(kind: str, layout: BasisLayout) -> sp.csr_matrix:
    """Embedded two-level operator on the qubit factor.

    sigma_z has eigenvalue +1 on the excited level; sigma_plus maps the
    ground block onto the excited block.
    """
    dim = layout.dim
    half = layout.qubit_stride
    idx = np.arange(dim)
    if kind == "sigma_z":
        data = np.where(layout.qubit_levels == 1, 1.0, -1.0)
        return _csr(idx, idx, data, dim)
    if kind == "excited_projector":
        rows = idx[half:]
        return _csr(rows, rows, np.ones(half), dim)
    if kind == "sigma_plus":
        cols = idx[:half]
        return _csr(cols + half, cols, np.ones(half), dim)
    if kind == "sigma_minus":
        return qubit_operator("sigma_plus", layout).conjugate().transpose().tocsr()
    if kind == "sigma_x":
        plus = qubit_operator("sigma_plus", layout)
        return (plus + plus.conjugate().transpose()).tocsr()
    raise ValueError(f"unknown qubit operator kind: {kind!r}")
