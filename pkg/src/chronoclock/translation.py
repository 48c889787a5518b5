"""The joint system+clock translation operator and its generator.

``build_superoperator`` returns

    W = sum_{t=1}^{N} U_{t,t-1} (x) |t mod N><t-1|,

with the cyclic closure ``U_{N,N-1} = U_{N-1}^dagger``. Every history state is
a fixed point of ``W``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from . import tolerances as tol
from .exceptions import ConsistencyError, KOutOfRange, NotCyclic
from .history import HAMILTONIAN, UnitarySchedule, build_history
from .linalg import dagger, dft_states, is_unitary, kron, max_abs, shift_operator

TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class SuperOperator:
    op: np.ndarray
    cyclic_step: np.ndarray
    dims: tuple[int, int]


@dataclass(frozen=True, eq=False)
class GeneratorJ:
    """Hermitian ``J`` with ``exp(-iJ) = W``.

    ``eigenphases`` are the eigenvalues of ``J``; ``grid_index`` assigns each
    one to its ``2 pi k / N`` slot and ``branch_offsets[k]`` is the integer
    ``n_k`` added to slot ``k`` (all zero for the principal branch).
    """

    op: np.ndarray
    eigenphases: np.ndarray
    eigenvectors: np.ndarray
    grid_index: np.ndarray
    branch_offsets: np.ndarray
    grid_deviation: float

    @property
    def multiplicities(self) -> np.ndarray:
        n = self.branch_offsets.size
        return np.bincount(self.grid_index, minlength=n)


@dataclass(frozen=True, eq=False)
class CyclicFactorization:
    unitary: np.ndarray
    shift: np.ndarray
    time: np.ndarray
    momentum: np.ndarray
    residual: float


def build_superoperator(schedule: UnitarySchedule) -> SuperOperator:
    m, n = schedule.dim, schedule.n_clock
    cum = schedule.cumulative()
    closing = dagger(cum[-1])
    op = np.zeros((m * n, m * n), dtype=complex)
    for t in range(1, n + 1):
        step = closing if t == n else schedule.step(t)
        hop = np.zeros((n, n))
        hop[t % n, t - 1] = 1.0
        op += kron(step, hop)
    if not is_unitary(op):
        raise ConsistencyError("translation operator failed the unitarity check")
    return SuperOperator(op, closing, (m, n))


def phase_eigenstate(schedule: UnitarySchedule, psi0: np.ndarray, k: int) -> np.ndarray:
    """``N**-0.5 * sum_t exp(2 pi i k t / N) |psi_t>|t>``, eigenvalue ``exp(-2 pi i k / N)``."""
    n = schedule.n_clock
    if not 0 <= k < n:
        raise KOutOfRange(f"k={k} outside 0..{n - 1}")
    amps = build_history(schedule, psi0).amplitudes
    phases = np.exp(2j * np.pi * k * np.arange(n) / n)
    return (amps * phases).reshape(-1)


def hermitian_parts(su: SuperOperator) -> tuple[np.ndarray, np.ndarray]:
    """``((W + W^dagger)/2, i (W - W^dagger)/2)``."""
    w = su.op
    return (w + dagger(w)) / 2, 1j * (w - dagger(w)) / 2


def generator_j(su: SuperOperator, offsets: Sequence[int] | None = None) -> GeneratorJ:
    """Hermitian logarithm of the translation operator.

    Eigenphases are taken on the principal branch ``[0, 2 pi)`` and then
    shifted by ``2 pi n_k`` for the grid slot ``k`` when ``offsets`` is given.
    """
    _, n = su.dims
    # complex Schur form of a normal matrix is diagonal with a unitary Z
    tri, z = scipy.linalg.schur(su.op, output="complex")
    lam = np.diagonal(tri)
    theta = np.mod(-np.angle(lam), TWO_PI)
    theta = np.where(theta > TWO_PI - tol.PHASE_CLUSTER, theta - TWO_PI, theta)

    grid = np.rint(theta * n / TWO_PI).astype(int) % n
    dev = np.abs(theta - TWO_PI * grid / n)
    dev = np.minimum(dev, TWO_PI - dev)

    offs = np.zeros(n, dtype=int) if offsets is None else np.asarray(offsets, dtype=int)
    if offs.shape != (n,):
        raise ValueError(f"offsets must have length {n}")
    theta = theta + TWO_PI * offs[grid]

    j = (z * theta) @ dagger(z)
    j = (j + dagger(j)) / 2
    return GeneratorJ(j, theta, z, grid, offs, float(dev.max(initial=0.0)))


def _unitary_spectrum(schedule: UnitarySchedule) -> np.ndarray:
    if schedule.kind == HAMILTONIAN:
        return np.exp(-1j * np.asarray(schedule.energies))
    return np.linalg.eigvals(np.asarray(schedule.unitary))


def is_cyclic(schedule: UnitarySchedule, n_clock: int | None = None) -> bool:
    """Whether ``U**N = 1`` holds on the spectrum, to within ``tol.CYCLIC``."""
    if not schedule.is_constant:
        return False
    n = schedule.n_clock if n_clock is None else n_clock
    lam = _unitary_spectrum(schedule)
    return bool(np.all(np.abs(lam**n - 1) <= tol.CYCLIC))


def clock_operators(n: int):
    """``(V, T, P)``: cyclic shift, time operator, and its conjugate momentum."""
    v = shift_operator(n)
    t = np.diag(np.arange(n, dtype=complex))
    f = dft_states(n)
    p = (f * (TWO_PI * np.arange(n) / n)) @ dagger(f)
    return v, t, (p + dagger(p)) / 2


def cyclic_factorization(schedule: UnitarySchedule) -> CyclicFactorization:
    """Write the translation operator as ``U (x) V`` for a cyclic constant schedule."""
    if not schedule.is_constant:
        raise NotCyclic("factorization needs a constant schedule")
    n = schedule.n_clock
    if not is_cyclic(schedule):
        raise NotCyclic(f"U**{n} != 1: spectrum is not on the 2 pi k / {n} grid")

    u = schedule.generator_unitary()
    v, t, p = clock_operators(n)
    residual = max_abs(build_superoperator(schedule).op - kron(u, v))
    if residual > tol.HERMITIAN:
        raise ConsistencyError(f"W != U (x) V, residual {residual:.3g}")
    shift_residual = max_abs(scipy.linalg.expm(-1j * p) - v)
    if shift_residual > tol.EIG:
        raise ConsistencyError(f"V != exp(-iP), residual {shift_residual:.3g}")
    return CyclicFactorization(u, v, t, p, residual)
