"""Closed-form results for small clocks, each cross-checked against the dense route.

Units have hbar = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .entanglement import quadratic_entanglement, schmidt, shannon_bits
from .exceptions import BadN, ConsistencyError, DimensionMismatch, NonUnitary, NotNormalizedBranch, ZeroVariance
from .history import UnitarySchedule, build_history, history_from_branches
from .linalg import check_normalized, eigh, is_unitary, kron


@dataclass(frozen=True, eq=False)
class QubitClockResult:
    """Single-step (``N = 2``) history state in closed form.

    ``plus_S``/``minus_S`` and ``plus_T``/``minus_T`` are the Schmidt vectors;
    ``minus_S`` is ``None`` when the step leaves the ray unchanged.
    """

    overlap_r: float
    p_plus: float
    p_minus: float
    E_vn: float
    E2: float
    gamma_phase: float
    plus_S: np.ndarray
    minus_S: np.ndarray | None
    plus_T: np.ndarray
    minus_T: np.ndarray


def qubit_clock(psi0: np.ndarray, U: np.ndarray) -> QubitClockResult:
    """Qubit clock for a system of any dimension evolving as ``psi_1 = U psi_0``."""
    psi0 = check_normalized(psi0)
    u = np.asarray(U, dtype=complex)
    if u.shape != (psi0.size, psi0.size):
        raise DimensionMismatch("U and psi0 dimensions differ")
    if not is_unitary(u):
        raise NonUnitary("U is not unitary")
    psi1 = u @ psi0
    ov = np.vdot(psi0, psi1)
    r = min(abs(ov), 1.0)
    gamma = float(np.angle(ov)) if r > tol.NORM else 0.0
    p_plus, p_minus = (1 + r) / 2, (1 - r) / 2

    ph = np.exp(1j * gamma)
    plus_S = (psi0 + psi1 / ph) / np.sqrt(4 * p_plus)
    minus_S = (psi0 - psi1 / ph) / np.sqrt(4 * p_minus) if p_minus > tol.RANK else None
    plus_T = np.array([1, ph]) / np.sqrt(2)
    minus_T = np.array([1, -ph]) / np.sqrt(2)

    hs = build_history(UnitarySchedule.constant(u, 2), psi0)
    p_dense = np.zeros(2)
    p_dense[: min(2, psi0.size)] = schmidt(hs).coefficients
    if abs(p_dense[0] - p_plus) > tol.HERMITIAN or abs(p_dense[-1] - p_minus) > tol.HERMITIAN:
        raise ConsistencyError("closed-form Schmidt coefficients disagree with the dense state")
    rebuilt = np.sqrt(p_plus) * kron(plus_S, plus_T)
    if minus_S is not None:
        rebuilt = rebuilt + np.sqrt(p_minus) * kron(minus_S, minus_T)
    if np.abs(rebuilt - hs.joint).max() > tol.HERMITIAN:
        raise ConsistencyError("closed-form Schmidt vectors do not rebuild the state")

    return QubitClockResult(r, p_plus, p_minus, shannon_bits([p_plus, p_minus]), 1 - r**2, gamma,
                            plus_S, minus_S, plus_T, minus_T)


class SmallStep(NamedTuple):
    E2_exact: float
    E2_quadratic: float


def energy_moments(h: np.ndarray, psi0: np.ndarray):
    """Level energies and weights of ``psi0`` in the eigenbasis of ``h``, plus the variance."""
    w, v = eigh(h)
    psi0 = check_normalized(psi0)
    weights = np.abs(v.conj().T @ psi0) ** 2
    mean = float(np.sum(weights * w))
    var = float(np.sum(weights * (w - mean) ** 2))
    return w, weights, var


def small_step_expansion(h: np.ndarray, psi0: np.ndarray, epsilon: float) -> SmallStep:
    """Single-step ``E_2`` for ``U = exp(-i epsilon h)``: exact value and its ``epsilon^2`` term."""
    w, weights, var = energy_moments(h, psi0)
    exact = 1 - abs(np.sum(weights * np.exp(-1j * epsilon * w))) ** 2
    return SmallStep(float(exact), float(epsilon**2 * var))


def expansion_orders(h: np.ndarray, psi0: np.ndarray, epsilons: Sequence[float] = (0.1, 0.05, 0.025)) -> list[float]:
    """Observed convergence orders of ``|exact - quadratic|`` between successive step sizes."""
    errs = []
    for e in epsilons:
        s = small_step_expansion(h, psi0, e)
        errs.append(abs(s.E2_exact - s.E2_quadratic))
    return [math.log(errs[i] / errs[i + 1]) / math.log(epsilons[i] / epsilons[i + 1])
            for i in range(len(errs) - 1)]


def two_level_exact(epsilon: float, gap: float, w0: float, w1: float) -> float:
    """``4 sin^2(epsilon gap / 2) |c0|^2 |c1|^2`` for a two-level ``h``."""
    return 4 * math.sin(epsilon * gap / 2) ** 2 * w0 * w1


def minimum_evolution_time(E2: float, variance: float) -> float:
    """``arcsin(sqrt(E2)) / sqrt(variance)``."""
    if not -tol.NORM <= E2 <= 1 + tol.NORM:
        raise ValueError("E2 must lie in [0, 1]")
    if variance <= 0:
        raise ZeroVariance("energy variance must be positive")
    return math.asin(math.sqrt(min(max(E2, 0.0), 1.0))) / math.sqrt(variance)


class TwoStateResult(NamedTuple):
    p_plus: float
    p_minus: float
    E2: float
    alpha_sq: float
    beta_sq: float
    gamma_overlap: float


def two_state_general(alpha_t: Sequence[complex], beta_t: Sequence[complex], check_dense: bool = True) -> TwoStateResult:
    """Schmidt data of a history state whose branches live in a fixed 2-D subspace.

    ``|psi_t> = alpha_t |0> + beta_t |1>``.
    """
    a = np.asarray(alpha_t, dtype=complex)
    b = np.asarray(beta_t, dtype=complex)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise DimensionMismatch("alpha_t and beta_t must be equal-length 1-D sequences")
    norms = np.abs(a) ** 2 + np.abs(b) ** 2
    if np.abs(norms - 1).max() > tol.HERMITIAN:
        raise NotNormalizedBranch("|alpha_t|^2 + |beta_t|^2 != 1 for some t")
    n = a.size
    alpha_sq = float(np.mean(np.abs(a) ** 2))
    beta_sq = float(np.mean(np.abs(b) ** 2))
    gamma = float(abs(np.sum(np.conj(b) * a)) / n)
    e2 = 4 * (alpha_sq * beta_sq - gamma**2)
    root = math.sqrt(max(1 - e2, 0.0))
    p_plus, p_minus = (1 + root) / 2, (1 - root) / 2

    if check_dense:
        p = schmidt(history_from_branches(np.stack([a, b], axis=1))).coefficients
        if abs(p[0] - p_plus) > tol.HERMITIAN or abs(p[-1] - p_minus) > tol.HERMITIAN:
            raise ConsistencyError("two-state Schmidt coefficients disagree with the dense state")
    return TwoStateResult(p_plus, p_minus, e2, alpha_sq, beta_sq, gamma)


@dataclass(frozen=True)
class BlochPathResult:
    phi: float
    N: float
    E2_N: float
    E2_generic: float
    E2_dense: float
    E2_limit: float
    alpha: float
    beta: float
    gamma_overlap: float


def bloch_limit(phi: float) -> float:
    """``1 - sin^2(phi) / phi^2``, the infinitely-fine-clock value."""
    return float(1 - np.sinc(phi / np.pi) ** 2)


def bloch_closed_form(phi: float, n: int) -> float:
    """``1 - sin^2(N phi/(N-1)) / (N^2 sin^2(phi/(N-1)))``.

    The step angle is reduced modulo ``pi`` and the ratio is written with
    ``sinc``, so the removable singularities at multiples of ``pi`` need no
    special casing.
    """
    if n < 2:
        raise BadN("N must be at least 2")
    x = phi / (n - 1)
    delta = x - np.pi * np.rint(x / np.pi)
    r = np.sinc(n * delta / np.pi) / np.sinc(delta / np.pi)
    return float(1 - r**2)


def bloch_branches(phi: float, n: int) -> np.ndarray:
    t = np.arange(n)
    ang = phi * t / (n - 1)
    return np.stack([np.cos(ang), np.sin(ang)], axis=1).astype(complex)


def bloch_path(phi: float, N: float, dense: bool = True) -> BlochPathResult:
    """Equally spaced path ``|0> -> cos(phi)|0> + sin(phi)|1>`` in the Bloch plane.

    ``N = inf`` returns the limit only; the generic and dense routes are NaN.
    """
    phi = float(phi)
    limit = bloch_limit(phi)
    if N == math.inf:
        return BlochPathResult(phi, math.inf, limit, math.nan, math.nan, limit, math.nan, math.nan, math.nan)
    if N != int(N) or N < 2:
        raise BadN(f"N must be an integer >= 2 or inf, got {N!r}")
    n = int(N)
    closed = bloch_closed_form(phi, n)
    br = bloch_branches(phi, n)
    gen = two_state_general(br[:, 0], br[:, 1], check_dense=False)
    e2_dense = math.nan
    if dense:
        theta = phi / (n - 1)
        rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        e2_dense = quadratic_entanglement(build_history(UnitarySchedule.constant(rot, n), [1, 0]))
    return BlochPathResult(phi, n, closed, gen.E2, e2_dense, limit,
                           math.sqrt(gen.alpha_sq), math.sqrt(gen.beta_sq), gen.gamma_overlap)


__all__ = [
    "QubitClockResult",
    "qubit_clock",
    "small_step_expansion",
    "expansion_orders",
    "energy_moments",
    "two_level_exact",
    "minimum_evolution_time",
    "two_state_general",
    "BlochPathResult",
    "bloch_path",
    "bloch_limit",
    "bloch_closed_form",
]
