"""Dense complex linear algebra used throughout the package.

States are plain 1-D ``numpy`` complex arrays and operators are 2-D arrays.
Where a tensor-factor structure matters it is passed explicitly as a ``dims``
sequence. Factor 0 is always the slowest-varying index, i.e. the same
convention as :func:`numpy.kron`.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .exceptions import (
    BadFactorIndex,
    DimensionMismatch,
    NoConvergence,
    NonOrthonormalBasis,
    NotHermitian,
    NotNormalized,
)


class EigenSystem(NamedTuple):
    """Eigenvalues with eigenvectors stored as the columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def kron(*factors: np.ndarray) -> np.ndarray:
    """Tensor product of vectors or matrices, first factor slowest."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def max_abs(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, atol: float = tol.HERMITIAN) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and max_abs(a - dagger(a)) <= atol


def is_unitary(a: np.ndarray, atol: float = tol.HERMITIAN) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return max_abs(dagger(a) @ a - np.eye(a.shape[0])) <= atol


def has_orthonormal_columns(a: np.ndarray, atol: float = tol.HERMITIAN) -> bool:
    a = np.asarray(a)
    return max_abs(dagger(a) @ a - np.eye(a.shape[1])) <= atol


def check_normalized(psi: np.ndarray, atol: float = tol.NORM) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise NotNormalized(f"state has norm {norm!r}, expected 1")
    return psi


def canonical_phase(psi: np.ndarray, atol: float = tol.NORM) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real positive."""
    psi = np.asarray(psi, dtype=complex)
    nz = np.flatnonzero(np.abs(psi) > atol)
    if nz.size == 0:
        return psi.copy()
    a = psi.flat[nz[0]]
    return psi * (abs(a) / a)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Kept factors appear in ascending order in the result.
    """
    dims = [int(d) for d in dims]
    rho = np.asarray(rho, dtype=complex)
    n = len(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionMismatch(f"operator of shape {rho.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < n:
            raise BadFactorIndex(f"factor {k} does not exist (have {n} factors)")

    t = rho.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out_idx = keep + [k + n for k in keep]
    reduced = np.einsum(t, row + col, out_idx)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(d, d)


def svd(m: np.ndarray):
    """Singular value decomposition ``m = u @ diag(s) @ vh`` with ``s`` descending."""
    try:
        u, s, vh = np.linalg.svd(np.asarray(m, dtype=complex), full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return u, s, vh


def eigh(h: np.ndarray, atol: float = tol.HERMITIAN) -> EigenSystem:
    """Eigendecomposition of a hermitian operator, eigenvalues ascending."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, atol):
        raise NotHermitian("operator is not hermitian within tolerance")
    try:
        w, v = np.linalg.eigh((h + dagger(h)) / 2)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenSystem(w, v)


def unitary_from_spectrum(energies: Sequence[float], basis: np.ndarray, t: float = 1) -> np.ndarray:
    """``exp(-i H t)`` for ``H = sum_k E_k |k><k|`` with ``|k>`` the columns of ``basis``."""
    energies = np.asarray(energies, dtype=float)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (energies.size, energies.size):
        raise DimensionMismatch("basis must be square with one column per energy")
    if not has_orthonormal_columns(basis):
        raise NonOrthonormalBasis("eigenbasis columns are not orthonormal")
    return (basis * np.exp(-1j * energies * t)) @ dagger(basis)


def dft_states(n: int) -> np.ndarray:
    """Fourier states of an ``n``-level clock as columns.

    Column ``k`` is ``n**-0.5 * sum_t exp(2 pi i k t / n) |t>``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.arange(n)
    return np.exp(2j * np.pi * np.outer(t, t) / n) / np.sqrt(n)


def shift_operator(n: int) -> np.ndarray:
    """Cyclic clock translation ``sum_t |t+1 mod n><t|``."""
    return np.roll(np.eye(n, dtype=complex), 1, axis=0)


def reduced_states(psi: np.ndarray, dims: tuple[int, int]):
    """Both one-sided reduced density matrices of a bipartite pure state."""
    a = np.asarray(psi, dtype=complex).reshape(dims)
    return a @ dagger(a), (dagger(a) @ a).T


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with the phase fix on R's diagonal."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (z + dagger(z)) / 2
