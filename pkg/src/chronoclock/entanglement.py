"""System-clock entanglement of history states.

All entropies are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .exceptions import BadPeriod, ConsistencyError, NotClustered, NotPeriodic
from .history import HistoryState, history_from_branches
from .linalg import canonical_phase, dagger, svd


@dataclass(frozen=True, eq=False)
class SchmidtData:
    """``|Psi> = sum_k sqrt(p_k) |k>_S |k>_T``.

    ``left_basis`` holds the system vectors as columns, ``right_basis`` the
    clock vectors as rows (so ``right_basis[k]`` is ``|k>_T``).
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.coefficients > tol.RANK))

    def reconstruct(self) -> np.ndarray:
        s = np.sqrt(self.coefficients)
        return np.einsum("k,sk,kt->st", s, self.left_basis, self.right_basis).reshape(-1)


class EntanglementReport(NamedTuple):
    E_vn: float
    E2: float
    tau_min: float
    rank: int


def schmidt(hs: HistoryState) -> SchmidtData:
    u, s, vh = svd(hs.amplitudes)
    p = s**2
    p = p / p.sum()
    return SchmidtData(p, u, vh)


def _probabilities(x) -> np.ndarray:
    if isinstance(x, SchmidtData):
        return x.coefficients
    return np.asarray(x, dtype=float)


def shannon_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0  # avoid -0.0


def entanglement_entropy(sd: SchmidtData | Sequence[float]) -> float:
    """von Neumann entropy of the Schmidt spectrum, ``0 log 0 = 0``."""
    return shannon_bits(_probabilities(sd))


def von_neumann_f(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def quadratic_f(p):
    p = np.asarray(p, dtype=float)
    return 2 * p * (1 - p)


def entropic_form(sd: SchmidtData | Sequence[float], f: Callable) -> float:
    """``sum_k f(p_k)`` for a concave ``f`` with ``f(0) = f(1) = 0``."""
    p = _probabilities(sd)
    return float(np.sum([f(x) for x in p]))


def purity_entropy(hs: HistoryState) -> float:
    """``2 (1 - Tr rho^2)`` from the smaller reduced state."""
    a = hs.amplitudes
    red = a @ dagger(a) if a.shape[0] <= a.shape[1] else dagger(a) @ a
    return float(2 * (1 - np.real(np.sum(np.abs(red) ** 2))))


def gram_entropy(hs: HistoryState, chunk: int = 512) -> float:
    """Quadratic entanglement from the pairwise overlaps of the visited states."""
    b = hs.branches
    n = b.shape[0]
    if n == 1:
        return 0.0
    total = 0.0
    for start in range(0, n, chunk):
        g = b[start:start + chunk].conj() @ b.T
        total += float(np.sum(np.abs(g) ** 2))
    off_diag = total - float(np.sum(np.abs(np.sum(np.abs(b) ** 2, axis=1)) ** 2))
    return 2 * (n - 1) / n * (1 - off_diag / (n * (n - 1)))


def quadratic_entanglement(hs: HistoryState) -> float:
    """``E_2 = 2 (1 - Tr rho_S^2)``, returned in its pairwise-overlap form.

    Both forms are evaluated; a disagreement beyond 1e-11 raises.
    """
    via_gram = gram_entropy(hs)
    via_purity = purity_entropy(hs)
    if abs(via_gram - via_purity) > 1e-11:
        raise ConsistencyError(f"E2 routes disagree: {via_gram!r} vs {via_purity!r}")
    return via_gram


def minimum_time(e_vn: float) -> float:
    return 2.0**e_vn - 1.0


def entanglement_report(hs: HistoryState) -> EntanglementReport:
    sd = schmidt(hs)
    e = entanglement_entropy(sd)
    return EntanglementReport(e, quadratic_entanglement(hs), minimum_time(e), sd.rank)


def effective_time_states(n_clock: int, period: int, gamma: float) -> np.ndarray:
    """Rows ``|t_L> = sqrt(L/N) sum_k exp(i gamma k) |t + L k>`` for ``t < L``."""
    reps = n_clock // period
    out = np.zeros((period, n_clock), dtype=complex)
    for t in range(period):
        for k in range(reps):
            out[t, t + period * k] = np.exp(1j * gamma * k)
    return out * np.sqrt(period / n_clock)


def periodic_reduction(hs: HistoryState, period: int, gamma: float) -> EntanglementReport:
    """Entanglement of a periodic evolution through its ``L``-level effective clock.

    Checks that the full clock and the reduced clock give the same entropy
    and that the effective time states are orthonormal.
    """
    n = hs.n_clock
    if period < 1 or n % period:
        raise BadPeriod(f"period {period} does not divide N={n}")
    b = hs.branches
    drift = np.abs(b[period:] - np.exp(1j * gamma) * b[:-period]) if period < n else np.zeros(1)
    if drift.size and drift.max() > tol.EIG:
        raise NotPeriodic(f"|psi_(t+L)> != e^(i gamma)|psi_t>, worst deviation {drift.max():.3g}")

    reduced = history_from_branches(b[:period])
    states = effective_time_states(n, period, gamma)
    ortho = np.abs(states.conj() @ states.T - np.eye(period)).max()
    if ortho > tol.HERMITIAN:
        raise ConsistencyError(f"effective time states not orthonormal ({ortho:.3g})")
    rebuilt = np.einsum("ts,tk->sk", b[:period], states).reshape(-1) / np.sqrt(period)
    if np.abs(rebuilt - hs.joint).max() > tol.HERMITIAN:
        raise ConsistencyError("state is not reproduced by the effective clock")

    full = entanglement_entropy(schmidt(hs))
    small = entanglement_report(reduced)
    if abs(full - small.E_vn) > tol.ENTROPY:
        raise ConsistencyError(f"entropy differs between clocks: {full!r} vs {small.E_vn!r}")
    return small


class PermanenceCluster(NamedTuple):
    first_time: int
    state: np.ndarray
    count: int
    weight: float


def permanence_profile(hs: HistoryState, cluster_tol: float = 1e-9) -> list[PermanenceCluster]:
    """Group the visited states into orthogonal rays and count time spent in each.

    Every pair of branch states must be either parallel or orthogonal up to
    ``cluster_tol``; otherwise :class:`NotClustered` is raised. The Schmidt
    coefficients are checked against ``n_k / N``.
    """
    b = hs.branches
    n = b.shape[0]
    reps: list[int] = []
    counts: list[int] = []
    for t in range(n):
        placed = False
        for i, r in enumerate(reps):
            ov = abs(np.vdot(b[r], b[t]))
            if ov >= 1 - cluster_tol:
                counts[i] += 1
                placed = True
                break
            if ov > cluster_tol:
                raise NotClustered(f"states at t={r} and t={t} overlap by {ov:.3g}")
        if not placed:
            reps.append(t)
            counts.append(1)

    clusters = [PermanenceCluster(r, canonical_phase(b[r]), c, c / n) for r, c in zip(reps, counts)]
    expected = np.sort([c.weight for c in clusters])[::-1]
    p = schmidt(hs).coefficients
    got = np.zeros(max(p.size, expected.size))
    got[: p.size] = np.sort(p)[::-1]
    want = np.zeros_like(got)
    want[: expected.size] = expected
    if np.abs(got - want).max() > tol.ENTROPY:
        raise ConsistencyError("Schmidt coefficients do not match permanence fractions")
    return clusters
