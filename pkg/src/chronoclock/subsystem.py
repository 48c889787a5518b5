"""Clock correlations of a subsystem ``B`` when the system splits as ``S = A + B``.

Tracing ``A`` out of a history state leaves a mixed ``B + T`` state. For two
qubits its entanglement is quantified by the Wootters concurrence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import tolerances as tol
from .entanglement import quadratic_entanglement
from .exceptions import (
    BadSplit,
    NonUnitary,
    NotDensityMatrix,
    NotLocalEvolution,
    NotTwoQubit,
    TimeOutOfRange,
    Unsupported,
)
from .history import HistoryState, UnitarySchedule, build_history
from .linalg import check_normalized, dagger, is_hermitian, is_unitary, kron, max_abs, partial_trace

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SPIN_FLIP = np.real(np.kron(SIGMA_Y, SIGMA_Y))

# eigenvalues below this fraction of the largest are treated as round-off
_PSD_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class SubsystemTimeState:
    rho_BT: np.ndarray
    source: HistoryState
    split: tuple[int, int]

    @property
    def dims(self) -> tuple[int, int]:
        return self.split[1], self.source.n_clock


class ConcurrenceReport(NamedTuple):
    C: float
    C_squared: float
    fidelity_F: float
    E2_total: float
    closed_form_overlap: float
    closed_form_fidelity: float
    ok: bool


class MonogamyReport(NamedTuple):
    p: float
    E2_closed: float
    E2_dense: float
    C_squared: float
    gap: float
    analytic_gap: float
    equality: bool
    equality_expected: bool
    ok: bool


def _check_split(m: int, split) -> tuple[int, int]:
    try:
        da, db = (int(x) for x in split)
    except (TypeError, ValueError) as exc:
        raise BadSplit("split must be a pair (dim_A, dim_B)") from exc
    if da < 1 or db < 1 or da * db != m:
        raise BadSplit(f"split {split} does not factor the system dimension {m}")
    return da, db


def reduce_to_BT(hs: HistoryState, split) -> SubsystemTimeState:
    """``rho_BT = Tr_A |Psi><Psi|`` with the system split as ``(dim_A, dim_B)``."""
    da, db = _check_split(hs.system_dim, split)
    rho = partial_trace(hs.density(), [da, db, hs.n_clock], keep=[1, 2])
    return SubsystemTimeState(rho, hs, (da, db))


def conditional_state(st: SubsystemTimeState, t: int) -> np.ndarray:
    """State of ``B`` given the clock reads ``t``."""
    db, n = st.dims
    if not 0 <= t < n:
        raise TimeOutOfRange(f"time {t} outside 0..{n - 1}")
    block = st.rho_BT.reshape(db, n, db, n)[:, t, :, t]
    return block / np.trace(block)


def psd_factor(rho: np.ndarray) -> np.ndarray:
    """``W`` with ``rho = W W^dagger`` from the clamped eigendecomposition."""
    w, v = np.linalg.eigh((rho + dagger(rho)) / 2)
    floor = _PSD_FLOOR * max(float(w.max(initial=0.0)), 0.0)
    w = np.where(w > floor, w, 0.0)
    return v * np.sqrt(w)


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + dagger(rho)) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ dagger(v)


def uhlmann_fidelity(rho0: np.ndarray, rho1: np.ndarray) -> float:
    """``Tr sqrt(sqrt(rho0) rho1 sqrt(rho0))``.

    Evaluated as the trace norm of ``W0^dagger W1`` for factors
    ``rho_i = W_i W_i^dagger``, which has the same singular values as
    ``sqrt(rho0) sqrt(rho1)``.
    """
    s = np.linalg.svd(dagger(psd_factor(rho0)) @ psd_factor(rho1), compute_uv=False)
    return float(np.sum(s))


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NotTwoQubit(f"expected a 4x4 two-qubit state, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise NotDensityMatrix("state is not hermitian")
    if abs(np.trace(rho) - 1) > tol.HERMITIAN:
        raise NotDensityMatrix("state does not have unit trace")
    if np.linalg.eigvalsh((rho + dagger(rho)) / 2).min() < -tol.HERMITIAN:
        raise NotDensityMatrix("state has negative eigenvalues")
    return rho


def wootters_concurrence(rho: np.ndarray) -> float:
    """Two-qubit concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the square roots of the eigenvalues of
    ``rho (sy sy) rho* (sy sy)``, obtained here as the singular values of
    ``W^T (sy sy) W`` with ``rho = W W^dagger`` to avoid square roots of
    round-off.
    """
    rho = _check_density(rho)
    w = psd_factor(rho)
    lam = np.linalg.svd(w.T @ SPIN_FLIP @ w, compute_uv=False)
    lam = np.sort(np.concatenate([lam, np.zeros(4)]))[::-1][:4]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_BT(st: SubsystemTimeState) -> float:
    db, n = st.dims
    if (db, n) != (2, 2):
        raise Unsupported("concurrence is only available for a qubit subsystem with a qubit clock")
    return wootters_concurrence(st.rho_BT)


def orthogonal_qubit(b: np.ndarray) -> np.ndarray:
    """The qubit state orthogonal to ``b`` (unique up to phase)."""
    return np.array([-np.conj(b[1]), np.conj(b[0])])


def _purified_pair(p: float, b0: np.ndarray) -> np.ndarray:
    q = 1 - p
    b1 = orthogonal_qubit(b0)
    e0, e1 = np.eye(2)
    return np.sqrt(p) * kron(e0, b0) + np.sqrt(q) * kron(e1, b1)


def concurrence_fidelity_identity(p: float, psi0_B: np.ndarray, U_B: np.ndarray) -> ConcurrenceReport:
    """Qubit ``B`` purified by qubit ``A`` with weights ``(p, 1-p)``, evolved locally for one step.

    The concurrence of ``rho_BT`` is compared with
    ``(p-q)^2 (1 - |<psi_0|U_B|psi_0>|^2)`` and with ``1 - F(rho_B0, rho_B1)^2``.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    b0 = check_normalized(psi0_B)
    u = np.asarray(U_B, dtype=complex)
    if b0.size != 2 or u.shape != (2, 2):
        raise NotTwoQubit("psi0_B and U_B must act on a qubit")
    if not is_unitary(u):
        raise NonUnitary("U_B is not unitary")
    q = 1 - p

    hs = build_history(UnitarySchedule.constant(kron(np.eye(2), u), 2), _purified_pair(p, b0))
    st = reduce_to_BT(hs, (2, 2))
    c = concurrence_BT(st)
    f = uhlmann_fidelity(conditional_state(st, 0), conditional_state(st, 1))
    by_overlap = (p - q) ** 2 * (1 - abs(np.vdot(b0, u @ b0)) ** 2)
    by_fidelity = 1 - f**2
    e2 = quadratic_entanglement(hs)
    ok = (abs(c**2 - by_overlap) <= tol.ENTROPY and abs(c**2 - by_fidelity) <= tol.ENTROPY
          and c**2 <= e2 + tol.ENTROPY)
    return ConcurrenceReport(c, c**2, f, e2, by_overlap, by_fidelity, bool(ok))


def local_unitary(u: np.ndarray, split) -> np.ndarray:
    """``U_B`` such that ``u = 1_A (x) U_B``; raises if ``u`` acts on ``A`` too."""
    da, db = _check_split(np.asarray(u).shape[0], split)
    ub = partial_trace(u, [da, db], keep=[1]) / da
    if max_abs(kron(np.eye(da), ub) - u) > tol.HERMITIAN:
        raise NotLocalEvolution("evolution does not act on B alone")
    return ub


def monogamy_check(hs: HistoryState, split=(2, 2)) -> MonogamyReport:
    """``E_2(S,T) >= C^2(B,T)`` for two system qubits, a qubit clock and evolution on ``B``.

    Equality is expected exactly when ``pq = 0`` or when ``U_B`` is a
    multiple of the identity, in which case both sides vanish.
    """
    if hs.system_dim != 4 or hs.n_clock != 2:
        raise NotTwoQubit("monogamy check needs a two-qubit system and a qubit clock")
    _check_split(4, split)
    if hs.schedule is None:
        raise NotLocalEvolution("history state carries no schedule to check locality against")
    ub = local_unitary(hs.schedule.cumulative()[1], split)

    _, s, vh = np.linalg.svd(hs.psi0.reshape(2, 2))
    p, q = float(s[0] ** 2), float(s[1] ** 2)
    b0, b1 = vh[0], vh[1]
    a = np.vdot(b0, ub @ b0)
    b = np.vdot(b1, ub @ b1)
    e2_closed = 1 - abs(p * a + q * b) ** 2
    e2_dense = quadratic_entanglement(hs)
    c2 = concurrence_BT(reduce_to_BT(hs, split)) ** 2
    gap = e2_closed - c2
    analytic_gap = 2 * p * q * (2 - abs(a) ** 2 - np.real(a * np.conj(b)))
    equality = abs(gap) <= tol.ENTROPY
    expected = p * q <= 1e-12 or max_abs(ub - a * np.eye(2)) <= tol.HERMITIAN

    ok = (abs(e2_closed - e2_dense) <= tol.HERMITIAN and gap >= -tol.ENTROPY
          and abs(gap - analytic_gap) <= tol.ENTROPY and (equality if expected else analytic_gap > 0))
    return MonogamyReport(p, e2_closed, e2_dense, c2, gap, float(analytic_gap), bool(equality), bool(expected), bool(ok))
