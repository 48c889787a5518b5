"""Energy spread of the initial state versus system-clock entanglement.

For a constant Hamiltonian the initial state is split over distinct energy
eigenspaces, ``|psi_0> = sum_k c_k |k>``. The entropy of ``{|c_k|^2}`` bounds
the system-clock entanglement from above and equals it when the spectrum is
an equally spaced ``2 pi k / N`` ladder. For such ladders the Fourier
transform ``c~_l`` of the coefficients gives the conjugate time spread.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import tolerances as tol
from .entanglement import SchmidtData, entanglement_entropy, quadratic_f, schmidt, shannon_bits, von_neumann_f
from .exceptions import DimensionMismatch, NotCyclicSpectrum
from .history import HistoryState
from .linalg import canonical_phase, check_normalized, dagger, eigh

TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class SpectralSpread:
    """Projection of ``psi0`` onto the distinct energy levels of ``H``.

    ``energies[k]`` is the mean eigenvalue of group ``k``, ``coefficients[k]``
    is ``c_k = <k|psi0>`` and ``states[:, k]`` the unit vector ``|k>`` inside
    that eigenspace. When ``n_clock`` is set and the spectrum is a displaced
    ``2 pi k / N`` ladder, ``ladder_index[k]`` is the rung of group ``k`` and
    ``conjugate`` holds ``c~_l`` for ``l = 0..N-1``.
    """

    energies: np.ndarray
    coefficients: np.ndarray
    states: np.ndarray
    group_tol: float
    n_clock: int | None = None
    ladder_index: np.ndarray | None = None
    conjugate: np.ndarray | None = None

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def spread_entropy(self) -> float:
        return shannon_bits(self.weights)

    @property
    def conjugate_entropy(self) -> float | None:
        if self.conjugate is None:
            return None
        return shannon_bits(np.abs(self.conjugate) ** 2)

    @property
    def is_cyclic(self) -> bool:
        return self.conjugate is not None

    def ladder_coefficients(self) -> np.ndarray:
        """``c_k`` laid out on the ``N`` rungs, zero on unoccupied rungs."""
        self._need_cyclic()
        out = np.zeros(self.n_clock, dtype=complex)
        out[self.ladder_index] = self.coefficients
        return out

    def _need_cyclic(self):
        if self.conjugate is None:
            raise NotCyclicSpectrum("spectrum is not a 2 pi k / N ladder for the given clock")


def default_group_tol(energies) -> float:
    e = np.asarray(energies, dtype=float)
    span = float(e.max() - e.min()) if e.size else 0.0
    return 1e-9 * max(1.0, span)


def _group(values: np.ndarray, group_tol: float) -> list[np.ndarray]:
    groups = [[0]]
    for i in range(1, values.size):
        if values[i] - values[i - 1] <= group_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]


def ladder_positions(energies, n_clock: int) -> np.ndarray | None:
    """Rung of each energy on a displaced ``E_0 + 2 pi k / N`` ladder, or ``None``.

    ``E_0`` is the lowest energy. Distinct energies that land on the same
    rung (i.e. differ by a multiple of ``2 pi``) disqualify the ladder.
    """
    e = np.asarray(energies, dtype=float)
    rel = e - e.min()
    if np.any(np.abs(np.exp(-1j * rel * n_clock) - 1) > tol.CYCLIC):
        return None
    k = np.rint(rel * n_clock / TWO_PI).astype(int) % n_clock
    if np.unique(k).size != k.size:
        return None
    return k


def conjugate_coefficients(c_ladder) -> np.ndarray:
    """``c~_l = N**-0.5 * sum_k exp(-2 pi i k l / N) c_k``."""
    c = np.asarray(c_ladder, dtype=complex)
    return np.fft.fft(c) / np.sqrt(c.size)


def spectral_spread(h: np.ndarray, psi0: np.ndarray, n_clock: int | None = None,
                    group_tol: float | None = None) -> SpectralSpread:
    """Decompose ``psi0`` over the distinct eigenvalues of the hermitian ``h``.

    Each ``|k>`` is the normalized projection of ``psi0`` onto its eigenspace,
    phase-fixed so its first nonzero component is real positive; groups that
    ``psi0`` does not touch fall back to the first eigenvector of the group.
    """
    w, v = eigh(h)
    psi0 = check_normalized(psi0)
    if psi0.size != w.size:
        raise DimensionMismatch("psi0 and H have different dimensions")
    gtol = default_group_tol(w) if group_tol is None else float(group_tol)

    energies, coeffs, states = [], [], []
    for g in _group(w, gtol):
        block = v[:, g]
        proj = block @ (dagger(block) @ psi0)
        norm = np.linalg.norm(proj)
        ket = canonical_phase(proj / norm) if norm > tol.NORM else canonical_phase(block[:, 0])
        energies.append(float(w[g].mean()))
        coeffs.append(np.vdot(ket, psi0))
        states.append(ket)

    energies = np.array(energies)
    coeffs = np.array(coeffs)
    states = np.array(states).T
    ladder = conj = None
    if n_clock is not None:
        ladder = ladder_positions(energies, n_clock)
        if ladder is not None:
            full = np.zeros(n_clock, dtype=complex)
            full[ladder] = coeffs
            conj = conjugate_coefficients(full)
    return SpectralSpread(energies, coeffs, states, gtol, n_clock, ladder, conj)


class CyclicEqualityReport(NamedTuple):
    entanglement: float
    spread_entropy: float
    weight_deviation: float
    basis_deviation: float
    ok: bool


def _padded_desc(a, size: int) -> np.ndarray:
    a = np.sort(np.asarray(a, dtype=float))[::-1]
    out = np.zeros(size)
    out[: a.size] = a
    return out


def verify_cyclic_equality(spread: SpectralSpread, hs: HistoryState) -> CyclicEqualityReport:
    """Check that entanglement equals spread entropy on a cyclic ladder.

    Also checks that the clock-side Schmidt subspaces coincide with those of
    the time states ``N**-0.5 * sum_t exp(-i E_k t) |t>``, grouped by equal
    weight.
    """
    n = hs.n_clock
    k = ladder_positions(spread.energies, n)
    if k is None:
        raise NotCyclicSpectrum("energies are not on a displaced 2 pi k / N ladder")
    sd = schmidt(hs)
    e = entanglement_entropy(sd)
    size = max(sd.coefficients.size, spread.weights.size)
    wdev = float(np.abs(_padded_desc(sd.coefficients, size) - _padded_desc(spread.weights, size)).max())

    t = np.arange(n)
    time_states = np.exp(-1j * np.outer(spread.energies, t)) / np.sqrt(n)
    bdev = 0.0
    weights = spread.weights
    p = sd.coefficients
    occupied = np.flatnonzero(weights > tol.RANK)
    occupied = occupied[np.argsort(weights[occupied])]
    for g in _group(weights[occupied], 1e-6):
        mine = occupied[g]
        lo, hi = weights[mine].min() - 1e-6, weights[mine].max() + 1e-6
        theirs = (p >= lo) & (p <= hi) & (p > tol.RANK)
        a = time_states[mine]
        b = sd.right_basis[theirs]
        pa = a.T @ a.conj()
        pb = b.T @ b.conj()
        bdev = max(bdev, float(np.abs(pa - pb).max()))

    ok = abs(e - spread.spread_entropy) <= tol.ENTROPY and wdev <= tol.ENTROPY and bdev <= 1e-8
    return CyclicEqualityReport(e, spread.spread_entropy, wdev, bdev, bool(ok))


class MajorizationReport(NamedTuple):
    spread_partial_sums: np.ndarray
    schmidt_partial_sums: np.ndarray
    max_violation: float
    strict: bool
    ok: bool


def majorization_check(spread: SpectralSpread, sd: SchmidtData) -> MajorizationReport:
    """``{|c_k|^2}`` is majorized by ``{p_k}``: every descending partial sum is smaller."""
    size = max(spread.weights.size, sd.coefficients.size)
    cs = np.cumsum(_padded_desc(spread.weights, size))
    ps = np.cumsum(_padded_desc(sd.coefficients, size))
    violation = float(np.max(cs - ps))
    totals_ok = abs(cs[-1] - 1) <= tol.ENTROPY and abs(ps[-1] - 1) <= tol.ENTROPY
    strict = bool(np.any(ps - cs > tol.ENTROPY))
    return MajorizationReport(cs, ps, violation, strict, bool(violation <= tol.ENTROPY and totals_ok))


class SchurBoundReport(NamedTuple):
    entanglement: float
    bound: float
    gap: float
    ok: bool


def schur_bound_check(spread: SpectralSpread, sd: SchmidtData, f: Callable = von_neumann_f) -> SchurBoundReport:
    """``sum_k f(p_k) <= sum_k f(|c_k|^2)`` for a Schur-concave entropic form."""
    lhs = float(np.sum(f(sd.coefficients)))
    rhs = float(np.sum(f(spread.weights)))
    return SchurBoundReport(lhs, rhs, rhs - lhs, bool(lhs <= rhs + tol.ENTROPY))


ENTROPIC_FORMS = {"vn": von_neumann_f, "quadratic": quadratic_f}


class UncertaintyReport(NamedTuple):
    E: float
    E_tilde: float
    total: float
    support_product: int
    bound: float
    ok: bool


def support_size(a) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(a)) ** 2 > tol.SUPPORT))


def uncertainty_relation(spread: SpectralSpread) -> UncertaintyReport:
    """Entropic energy-time relation ``E + E~ >= log2 N`` and ``n(c) n(c~) >= N``."""
    spread._need_cyclic()
    n = spread.n_clock
    e, et = spread.spread_entropy, spread.conjugate_entropy
    support = support_size(spread.coefficients) * support_size(spread.conjugate)
    bound = float(np.log2(n))
    ok = e + et >= bound - tol.ENTROPY and support >= n
    return UncertaintyReport(e, et, e + et, support, bound, bool(ok))


def conjugate_states(spread: SpectralSpread) -> np.ndarray:
    """Maximally spread system states ``|l~>_S = N**-0.5 sum_k exp(2 pi i k l / N)|k>`` as columns.

    Needs every rung of the ladder occupied by an energy level.
    """
    spread._need_cyclic()
    n = spread.n_clock
    if spread.ladder_index.size != n:
        raise NotCyclicSpectrum("conjugate states need all N ladder rungs present")
    kets = np.zeros((spread.states.shape[0], n), dtype=complex)
    kets[:, spread.ladder_index] = spread.states
    l = np.arange(n)
    return kets @ np.exp(2j * np.pi * np.outer(l, l) / n) / np.sqrt(n)


class SpreadGap(NamedTuple):
    entropy_gap: float
    max_time_overlap: float


def spread_gap(spread: SpectralSpread, hs: HistoryState) -> SpreadGap:
    """How far a general spectrum is from the cyclic equality.

    Reports the spread entropy minus the entanglement entropy together with
    the largest off-diagonal overlap of the clock states
    ``N**-0.5 sum_t exp(-i E_k t)|t>``. No bound is asserted.
    """
    n = hs.n_clock
    t = np.arange(n)
    ts = np.exp(-1j * np.outer(spread.energies, t)) / np.sqrt(n)
    g = ts.conj() @ ts.T
    np.fill_diagonal(g, 0)
    gap = spread.spread_entropy - entanglement_entropy(schmidt(hs))
    return SpreadGap(float(gap), float(np.abs(g).max(initial=0.0)))
