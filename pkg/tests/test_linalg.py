import numpy as np
import pytest
from hypothesis import given, strategies as st

from chronoclock.exceptions import BadFactorIndex, NonOrthonormalBasis, NotHermitian, NotNormalized
from chronoclock.linalg import (
    canonical_phase,
    check_normalized,
    dft_states,
    eigh,
    kron,
    partial_trace,
    random_hermitian,
    random_state,
    shift_operator,
    svd,
    unitary_from_spectrum,
)

from strategies import seeds

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def _kron_loops(a, b):
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(b.shape[0]):
                for l in range(b.shape[1]):
                    out[i * b.shape[0] + k, j * b.shape[1] + l] = a[i, j] * b[k, l]
    return out


def test_kron_identity_and_basis():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron([1, 0], [0, 1]), np.eye(4)[1])


def test_kron_matches_elementwise_definition(rng):
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.abs(kron(X, np.outer(plus, plus)) - _kron_loops(X, np.outer(plus, plus))).max() <= 1e-14
    for _ in range(5):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert np.abs(kron(a, b) - _kron_loops(a, b)).max() <= 1e-14


@given(seeds)
def test_kron_associative(seed):
    g = np.random.default_rng(seed)
    a, b, c = (g.normal(size=(2, 3)) + 1j * g.normal(size=(2, 3)) for _ in range(3))
    assert np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))).max() <= 1e-13


def test_partial_trace_simple_cases(rng):
    ra = np.diag([0.3, 0.7]).astype(complex)
    rb = random_hermitian(3, rng)
    rb = rb @ rb
    rb /= np.trace(rb)
    assert np.abs(partial_trace(kron(ra, rb), [2, 3], keep=[1]) - rb).max() <= 1e-12
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.abs(partial_trace(np.outer(phi, phi), [2, 2], keep=[0]) - np.eye(2) / 2).max() <= 1e-15


def test_partial_trace_nested_sum_oracle(rng):
    psi = random_state(12, rng)
    rho = np.outer(psi, psi.conj())
    got = partial_trace(rho, [2, 3, 2], keep=[0, 2])
    r = rho.reshape(2, 3, 2, 2, 3, 2)
    want = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for c in range(2):
            for a2 in range(2):
                for c2 in range(2):
                    want[a * 2 + c, a2 * 2 + c2] = sum(r[a, b, c, a2, b, c2] for b in range(3))
    assert np.abs(got - want).max() <= 1e-13


@given(seeds)
def test_partial_trace_of_product_scales_by_trace(seed):
    g = np.random.default_rng(seed)
    ra, rb = random_hermitian(2, g), random_hermitian(3, g)
    assert np.abs(partial_trace(kron(ra, rb), [2, 3], keep=[0]) - ra * np.trace(rb)).max() <= 1e-12


@given(seeds)
def test_partial_trace_preserves_trace_and_positivity(seed):
    g = np.random.default_rng(seed)
    psi = random_state(12, g)
    red = partial_trace(np.outer(psi, psi.conj()), [3, 4], keep=[1])
    assert abs(np.trace(red) - 1) <= 1e-12
    assert np.abs(red - red.conj().T).max() <= 1e-10
    assert np.linalg.eigvalsh(red).min() >= -1e-10


def test_partial_trace_rejects_missing_factor():
    with pytest.raises(BadFactorIndex):
        partial_trace(np.eye(4), [2, 2], keep=[2])


def test_svd_examples(rng):
    assert np.allclose(svd(np.eye(3))[1], 1)
    assert np.array_equal(svd(np.diag([3.0, 0.0]))[1], [3, 0])
    m = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
    u, s, vh = svd(m)
    assert np.all(np.diff(s) <= 0)
    assert np.abs(u @ np.diag(s) @ vh - m).max() <= 1e-10 * max(1, np.abs(m).max())


def test_eigh_examples(rng):
    assert np.array_equal(eigh(Z).values, [-1, 1])
    assert np.array_equal(eigh(np.zeros((3, 3))).values, [0, 0, 0])
    h = random_hermitian(8, rng)
    w, v = eigh(h)
    assert abs(w.sum() - np.trace(h).real) <= 1e-10
    assert np.abs(h @ v - v * w).max() <= 1e-9
    with pytest.raises(NotHermitian):
        eigh(np.array([[0, 1], [0, 0]]))


@given(seeds)
def test_eigh_reconstructs(seed):
    h = random_hermitian(5, np.random.default_rng(seed))
    w, v = eigh(h)
    assert np.abs((v * w) @ v.conj().T - h).max() <= 1e-9


def test_unitary_from_spectrum(rng):
    basis = np.eye(2)
    assert np.array_equal(unitary_from_spectrum([0.3, 1.2], basis, 0), np.eye(2))
    assert np.abs(unitary_from_spectrum([np.pi, -np.pi], basis, 1) + np.eye(2)).max() <= 1e-15
    w, v = eigh(random_hermitian(4, rng))
    one = unitary_from_spectrum(w, v, 1)
    assert np.abs(unitary_from_spectrum(w, v, 5) - one @ one @ one @ one @ one).max() <= 1e-10
    with pytest.raises(NonOrthonormalBasis):
        unitary_from_spectrum([0, 1], np.array([[1, 1], [0, 1]]), 1)


def test_dft_states():
    assert np.array_equal(dft_states(1), [[1]])
    d2 = dft_states(2)
    assert np.allclose(d2[:, 0], [1 / np.sqrt(2)] * 2) and np.allclose(d2[:, 1], [1 / np.sqrt(2), -1 / np.sqrt(2)])
    d5 = dft_states(5)
    assert np.abs(d5.conj().T @ d5 - np.eye(5)).max() <= 1e-13


@given(st.integers(1, 12))
def test_dft_states_diagonalize_shift(n):
    d = dft_states(n)
    k = np.arange(n)
    assert np.abs(shift_operator(n) @ d - d * np.exp(-2j * np.pi * k / n)).max() <= 1e-10


def test_normalization_and_phase():
    with pytest.raises(NotNormalized):
        check_normalized([1, 1])
    v = canonical_phase(np.array([0, 1j, 1]) / np.sqrt(2))
    assert v[1].real > 0 and v[1].imag == 0
