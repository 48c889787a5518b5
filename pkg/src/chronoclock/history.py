"""System-clock history states and the circuit that prepares them.

A history state over an ``N``-level clock is

    |Psi> = N**-0.5 * sum_t |psi_t> (x) |t>,    |psi_t> = U_t |psi_0>,

stored as a flat vector of length ``M * N`` with the system factor slowest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    NonOrthonormalBasis,
    NonUnitaryStep,
    NotNormalizedBranch,
    NotPowerOfTwo,
    TimeOutOfRange,
)
from . import tolerances as tol
from .linalg import (
    canonical_phase,
    check_normalized,
    dagger,
    eigh,
    has_orthonormal_columns,
    is_unitary,
    unitary_from_spectrum,
)

EXPLICIT = "explicit"
UNITARY = "unitary"
HAMILTONIAN = "hamiltonian"

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class UnitarySchedule:
    """The sequence of system unitaries ``U_0 = 1, U_1, ..., U_{N-1}``.

    Build one through :meth:`explicit`, :meth:`constant` or :meth:`hamiltonian`
    rather than calling the constructor.
    """

    n_clock: int
    kind: str
    steps: tuple = ()
    unitary: np.ndarray | None = None
    energies: np.ndarray | None = None
    basis: np.ndarray | None = None

    @classmethod
    def explicit(cls, steps: Sequence[np.ndarray]) -> "UnitarySchedule":
        """Schedule from the step unitaries ``U_{t,t-1}``, ``t = 1..N-1``.

        An empty list is allowed only through :meth:`trivial`, since the system
        dimension could not be inferred.
        """
        steps = tuple(_frozen(s) for s in steps)
        if not steps:
            raise DimensionMismatch("explicit schedule needs at least one step; use trivial()")
        m = steps[0].shape[0]
        for i, s in enumerate(steps, start=1):
            if s.shape != (m, m):
                raise DimensionMismatch(f"step {i} has shape {s.shape}, expected {(m, m)}")
            if not is_unitary(s):
                raise NonUnitaryStep(f"step U_{{{i},{i - 1}}} is not unitary")
        return cls(n_clock=len(steps) + 1, kind=EXPLICIT, steps=steps)

    @classmethod
    def trivial(cls, dim: int, n_clock: int) -> "UnitarySchedule":
        return cls.constant(np.eye(dim), n_clock)

    @classmethod
    def constant(cls, unitary: np.ndarray, n_clock: int) -> "UnitarySchedule":
        u = _frozen(unitary)
        if not is_unitary(u):
            raise NonUnitaryStep("evolution operator is not unitary")
        if n_clock < 1:
            raise ValueError("clock dimension must be >= 1")
        return cls(n_clock=int(n_clock), kind=UNITARY, unitary=u)

    @classmethod
    def hamiltonian(cls, energies: Sequence[float], n_clock: int, basis: np.ndarray | None = None) -> "UnitarySchedule":
        """Constant evolution ``U = exp(-i H)`` with ``H`` given by its spectrum.

        ``basis`` holds the eigenvectors as columns; the computational basis
        is used when omitted.
        """
        e = np.array(energies, dtype=float)
        e.setflags(write=False)
        b = _frozen(np.eye(e.size) if basis is None else basis)
        if b.shape != (e.size, e.size):
            raise DimensionMismatch("basis must be square with one column per energy")
        if not has_orthonormal_columns(b):
            raise NonOrthonormalBasis("eigenbasis columns are not orthonormal")
        if n_clock < 1:
            raise ValueError("clock dimension must be >= 1")
        return cls(n_clock=int(n_clock), kind=HAMILTONIAN, energies=e, basis=b)

    @classmethod
    def from_hamiltonian_matrix(cls, h: np.ndarray, n_clock: int) -> "UnitarySchedule":
        w, v = eigh(h)
        return cls.hamiltonian(w, n_clock, v)

    @property
    def dim(self) -> int:
        if self.kind == EXPLICIT:
            return self.steps[0].shape[0]
        if self.kind == UNITARY:
            return self.unitary.shape[0]
        return self.energies.size

    @property
    def is_constant(self) -> bool:
        return self.kind in (UNITARY, HAMILTONIAN)

    def with_clock(self, n_clock: int) -> "UnitarySchedule":
        if not self.is_constant:
            raise TypeError("only constant schedules can be re-targeted to another clock size")
        if self.kind == UNITARY:
            return UnitarySchedule.constant(self.unitary, n_clock)
        return UnitarySchedule.hamiltonian(self.energies, n_clock, self.basis)

    def generator_unitary(self) -> np.ndarray:
        """The one-step unitary ``U`` of a constant schedule."""
        return self.power(1)

    def power(self, t: int) -> np.ndarray:
        """``U**t`` for a constant schedule (exact spectral route for Hamiltonians)."""
        if self.kind == HAMILTONIAN:
            return unitary_from_spectrum(self.energies, self.basis, t)
        if self.kind == UNITARY:
            return np.linalg.matrix_power(np.asarray(self.unitary), int(t))
        raise TypeError("power() needs a constant schedule")

    def cumulative(self) -> list[np.ndarray]:
        """``[U_0, ..., U_{N-1}]``.

        Explicit and constant-unitary schedules accumulate step by step,
        ``U_t = U_{t,t-1} U_{t-1}``; Hamiltonian schedules exponentiate the
        spectrum at each ``t`` directly.
        """
        m = self.dim
        if self.kind == HAMILTONIAN:
            return [unitary_from_spectrum(self.energies, self.basis, t) for t in range(self.n_clock)]
        out = [np.eye(m, dtype=complex)]
        for t in range(1, self.n_clock):
            step = self.steps[t - 1] if self.kind == EXPLICIT else self.unitary
            out.append(step @ out[-1])
        return out

    def step(self, t: int) -> np.ndarray:
        """``U_{t,t-1}`` for ``t = 1..N``; ``t = N`` is the cyclic closure ``U_{N-1}^dagger``."""
        if not 1 <= t <= self.n_clock:
            raise TimeOutOfRange(f"step index {t} outside 1..{self.n_clock}")
        if t == self.n_clock:
            return dagger(self.cumulative()[-1])
        if self.kind == EXPLICIT:
            return np.asarray(self.steps[t - 1])
        return self.generator_unitary()


@dataclass(frozen=True, eq=False)
class HistoryState:
    joint: np.ndarray
    dims: tuple[int, int]
    psi0: np.ndarray
    schedule: UnitarySchedule | None = field(default=None)

    def __post_init__(self):
        m, n = self.dims
        if self.joint.shape != (m * n,):
            raise DimensionMismatch(f"joint vector of shape {self.joint.shape} does not match dims {self.dims}")
        norms = np.linalg.norm(self.joint.reshape(m, n), axis=0)
        if np.abs(norms - n**-0.5).max() > tol.NORM:
            raise NotNormalizedBranch("every clock reading must carry weight 1/N")
        self.joint.setflags(write=False)

    @property
    def system_dim(self) -> int:
        return self.dims[0]

    @property
    def n_clock(self) -> int:
        return self.dims[1]

    @property
    def amplitudes(self) -> np.ndarray:
        """The joint state as an ``(M, N)`` matrix; column ``t`` is ``<t|Psi>``."""
        return self.joint.reshape(self.dims)

    @property
    def branches(self) -> np.ndarray:
        """Branch states ``|psi_t>`` as rows, with the phases they carry in ``joint``."""
        return np.sqrt(self.n_clock) * self.amplitudes.T

    def density(self) -> np.ndarray:
        return np.outer(self.joint, np.conj(self.joint))


def history_amplitudes(schedule: UnitarySchedule, psi0: np.ndarray) -> np.ndarray:
    """``N**-0.5 * sum_t U_t psi0 (x) |t>`` as a flat vector.

    Linear in ``psi0``; no normalization is checked or applied.
    """
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.size != schedule.dim:
        raise DimensionMismatch(f"psi0 has dimension {psi0.size}, schedule acts on {schedule.dim}")
    cols = np.stack([u @ psi0 for u in schedule.cumulative()], axis=1)
    return (cols / np.sqrt(schedule.n_clock)).reshape(-1)


def build_history(schedule: UnitarySchedule, psi0: np.ndarray) -> HistoryState:
    psi0 = check_normalized(psi0)
    joint = history_amplitudes(schedule, psi0)
    return HistoryState(joint, (schedule.dim, schedule.n_clock), _frozen(psi0), schedule)


def history_from_branches(branches: Sequence[np.ndarray]) -> HistoryState:
    """History state from an arbitrary list of normalized system states ``|psi_t>``."""
    rows = np.array([check_normalized(b) for b in branches], dtype=complex)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DimensionMismatch("branches must be a non-empty list of equal-length vectors")
    n, m = rows.shape
    joint = (rows.T / np.sqrt(n)).reshape(-1)
    return HistoryState(joint, (m, n), _frozen(rows[0]), None)


def _check_time(hs: HistoryState, t: int) -> int:
    if not 0 <= int(t) < hs.n_clock:
        raise TimeOutOfRange(f"time {t} outside 0..{hs.n_clock - 1}")
    return int(t)


def time_probabilities(hs: HistoryState) -> np.ndarray:
    return np.sum(np.abs(hs.amplitudes) ** 2, axis=0)


def condition_on_time(hs: HistoryState, t: int) -> np.ndarray:
    """Normalized system state after the clock is found at ``t``.

    The global phase is fixed so that the first nonzero amplitude is real
    positive.
    """
    t = _check_time(hs, t)
    col = hs.amplitudes[:, t]
    return canonical_phase(col / np.linalg.norm(col))


@dataclass(frozen=True)
class TimeRegister:
    """``n`` time qubits encoding ``t = sum_j t_j 2**(j-1)``, qubit 1 least significant."""

    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("a time register needs at least one qubit")

    @classmethod
    def for_clock(cls, n_clock: int) -> "TimeRegister":
        n = int(n_clock).bit_length() - 1
        if n_clock < 2 or 1 << n != n_clock:
            raise NotPowerOfTwo(f"clock dimension {n_clock} is not a power of two")
        return cls(n)

    @property
    def n_clock(self) -> int:
        return 1 << self.n_qubits

    def bits(self, t: int) -> list[int]:
        """``[t_1, ..., t_n]``."""
        return [(t >> (j - 1)) & 1 for j in range(1, self.n_qubits + 1)]

    def axis(self, j: int) -> int:
        """Tensor axis of qubit ``j`` in a state reshaped to ``(M, 2, ..., 2)``."""
        return 1 + self.n_qubits - j


def _apply_single(state: np.ndarray, gate: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(gate, state, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_controlled(state: np.ndarray, target: np.ndarray, control_axis: int) -> np.ndarray:
    idx = [slice(None)] * state.ndim
    idx[control_axis] = 1
    idx = tuple(idx)
    out = state.copy()
    out[idx] = np.tensordot(target, state[idx], axes=([1], [0]))
    return out


def simulate_circuit(generator: UnitarySchedule, psi0: np.ndarray, n: int) -> HistoryState:
    """Prepare the history state with ``n`` time qubits by gate-level simulation.

    Hadamards on every time qubit, then controlled ``U**(2**(j-1))`` from time
    qubit ``j`` onto the system. Gates act on the reshaped statevector; no
    full-space matrices are formed.
    """
    reg = TimeRegister(int(n))
    sched = generator.with_clock(reg.n_clock)
    psi0 = check_normalized(psi0)
    m = sched.dim
    if psi0.size != m:
        raise DimensionMismatch(f"psi0 has dimension {psi0.size}, generator acts on {m}")

    state = np.zeros((m,) + (2,) * reg.n_qubits, dtype=complex)
    state[(slice(None),) + (0,) * reg.n_qubits] = psi0
    for j in range(1, reg.n_qubits + 1):
        state = _apply_single(state, HADAMARD, reg.axis(j))
    for j in range(1, reg.n_qubits + 1):
        state = _apply_controlled(state, sched.power(1 << (j - 1)), reg.axis(j))

    return HistoryState(state.reshape(-1), (m, reg.n_clock), _frozen(psi0), sched)


def measure_time_register(hs: HistoryState, rng_seed: int) -> tuple[int, np.ndarray]:
    """Sample a clock reading (PCG64 seeded with ``rng_seed``) and collapse the system."""
    rng = np.random.default_rng(rng_seed)
    p = time_probabilities(hs)
    t = int(rng.choice(hs.n_clock, p=p / p.sum()))
    return t, condition_on_time(hs, t)


def fidelity(a: HistoryState | np.ndarray, b: HistoryState | np.ndarray) -> float:
    """``|<a|b>|`` between two pure joint states."""
    va = a.joint if isinstance(a, HistoryState) else np.asarray(a)
    vb = b.joint if isinstance(b, HistoryState) else np.asarray(b)
    return float(abs(np.vdot(va, vb)))


__all__ = [
    "UnitarySchedule",
    "HistoryState",
    "TimeRegister",
    "build_history",
    "history_amplitudes",
    "history_from_branches",
    "condition_on_time",
    "time_probabilities",
    "simulate_circuit",
    "measure_time_register",
    "fidelity",
]
