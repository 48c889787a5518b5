import numpy as np
import pytest
from hypothesis import given, strategies as st

from chronoclock.entanglement import quadratic_entanglement
from chronoclock.exceptions import BadSplit, NotDensityMatrix, NotLocalEvolution, NotTwoQubit, TimeOutOfRange, Unsupported
from chronoclock.history import UnitarySchedule, build_history
from chronoclock.linalg import kron, random_state, random_unitary
from chronoclock.subsystem import (
    concurrence_BT,
    concurrence_fidelity_identity,
    conditional_state,
    monogamy_check,
    reduce_to_BT,
    uhlmann_fidelity,
    wootters_concurrence,
)

from strategies import seeds

X = np.array([[0, 1], [1, 0]], dtype=complex)
BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def _ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _local(steps):
    return UnitarySchedule.explicit([kron(np.eye(2), u) for u in steps])


def _rho_b0(psi0):
    m = psi0.reshape(2, 2)
    return m.T @ m.conj()


def test_product_state_gives_pure_bt(rng):
    psi0 = kron(random_state(2, rng), random_state(2, rng))
    st_ = reduce_to_BT(build_history(_local([random_unitary(2, rng)] * 3), psi0), (2, 2))
    assert abs(np.trace(st_.rho_BT @ st_.rho_BT).real - 1) <= 1e-12


def test_bell_with_identity_is_stationary_mixture():
    st_ = reduce_to_BT(build_history(UnitarySchedule.trivial(4, 3), BELL), (2, 2))
    phi = np.ones(3) / np.sqrt(3)
    assert np.abs(st_.rho_BT - kron(np.eye(2) / 2, np.outer(phi, phi))).max() <= 1e-12
    assert concurrence_BT(reduce_to_BT(build_history(UnitarySchedule.trivial(4, 2), BELL), (2, 2))) <= 1e-12


@given(seeds, st.integers(2, 5))
def test_local_evolution_gives_branch_mixture(seed, n):
    g = np.random.default_rng(seed)
    steps = [random_unitary(2, g) for _ in range(n - 1)]
    psi0 = random_state(4, g)
    st_ = reduce_to_BT(build_history(_local(steps), psi0), (2, 2))
    q, b = np.linalg.eigh(_rho_b0(psi0))
    mixture = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(2):
        branch = build_history(UnitarySchedule.explicit(steps), b[:, j]).joint
        mixture += q[j] * np.outer(branch, branch.conj())
    assert np.abs(st_.rho_BT - mixture).max() <= 1e-10
    assert abs(np.trace(st_.rho_BT) - 1) <= 1e-12
    assert np.linalg.eigvalsh(st_.rho_BT).min() >= -1e-10

    cumulative = [np.eye(2)]
    for u in steps:
        cumulative.append(u @ cumulative[-1])
    rho_b = np.zeros((2, 2), dtype=complex)
    for t in range(n):
        rho_t = conditional_state(st_, t)
        assert np.abs(rho_t - cumulative[t] @ _rho_b0(psi0) @ cumulative[t].conj().T).max() <= 1e-10
        rho_b += rho_t / n
    traced = np.einsum("itjt->ij", st_.rho_BT.reshape(2, n, 2, n))
    assert np.abs(traced - rho_b).max() <= 1e-10


def test_conditional_state_examples(rng):
    psi0 = random_state(4, rng)
    st_ = reduce_to_BT(build_history(_local([random_unitary(2, rng)]), psi0), (2, 2))
    assert np.abs(conditional_state(st_, 0) - _rho_b0(psi0)).max() <= 1e-12
    with pytest.raises(TimeOutOfRange):
        conditional_state(st_, 2)

    psi0 = np.sqrt(0.7) * kron([1, 0], [1, 0]) + np.sqrt(0.3) * kron([0, 1], [0, 1])
    st_ = reduce_to_BT(build_history(_local([X]), psi0), (2, 2))
    assert np.abs(conditional_state(st_, 1) - np.diag([0.3, 0.7])).max() <= 1e-12


def test_wootters_examples(rng):
    assert abs(wootters_concurrence(np.outer(BELL, BELL)) - 1) <= 1e-12
    assert wootters_concurrence(np.eye(4) / 4) == 0
    for _ in range(20):
        psi = random_state(4, rng)
        sv = np.linalg.svd(psi.reshape(2, 2), compute_uv=False) ** 2
        assert abs(wootters_concurrence(np.outer(psi, psi.conj())) ** 2 - 4 * sv[0] * sv[1]) <= 1e-10
    with pytest.raises(NotTwoQubit):
        wootters_concurrence(np.eye(3) / 3)
    with pytest.raises(NotDensityMatrix):
        wootters_concurrence(np.diag([1.5, -0.5, 0, 0]))


@given(seeds)
def test_concurrence_is_local_unitary_invariant(seed):
    g = np.random.default_rng(seed)
    psi = random_state(4, g)
    mix = 0.6 * np.outer(psi, psi.conj()) + 0.4 * np.eye(4) / 4
    w = kron(random_unitary(2, g), random_unitary(2, g))
    assert abs(wootters_concurrence(mix) - wootters_concurrence(w @ mix @ w.conj().T)) <= 1e-9


@given(seeds)
def test_fidelity_of_pure_states_is_overlap(seed):
    g = np.random.default_rng(seed)
    a, b = random_state(3, g), random_state(3, g)
    assert abs(uhlmann_fidelity(np.outer(a, a.conj()), np.outer(b, b.conj())) - abs(np.vdot(a, b))) <= 1e-10


def test_concurrence_fidelity_identity_examples(rng):
    rep = concurrence_fidelity_identity(0.5, random_state(2, rng), random_unitary(2, rng))
    assert rep.ok and rep.C <= 1e-9

    b0, u = random_state(2, rng), random_unitary(2, rng)
    rep = concurrence_fidelity_identity(1.0, b0, u)
    assert rep.ok and abs(rep.C_squared - (1 - abs(np.vdot(b0, u @ b0)) ** 2)) <= 1e-9

    rep = concurrence_fidelity_identity(0.8, np.array([1, 0]), _ry(np.pi / 3))
    expected = 0.6**2 * (1 - np.cos(np.pi / 6) ** 2)
    assert rep.ok
    assert abs(rep.C_squared - expected) <= 1e-9
    assert abs(rep.closed_form_overlap - expected) <= 1e-12
    assert abs(rep.closed_form_fidelity - expected) <= 1e-9


@given(seeds)
def test_overlap_is_the_same_for_orthogonal_qubit_states(seed):
    g = np.random.default_rng(seed)
    b0, u = random_state(2, g), random_unitary(2, g)
    b1 = np.array([-np.conj(b0[1]), np.conj(b0[0])])
    assert abs(abs(np.vdot(b0, u @ b0)) - abs(np.vdot(b1, u @ b1))) <= 1e-12


def test_monogamy_examples(rng):
    pure = build_history(_local([random_unitary(2, rng)]), kron(random_state(2, rng), random_state(2, rng)))
    rep = monogamy_check(pure)
    assert rep.ok and rep.equality and rep.equality_expected

    b = random_unitary(2, rng)
    psi0 = (kron([1, 0], b[:, 0]) + kron([0, 1], b[:, 1])) / np.sqrt(2)
    rep = monogamy_check(build_history(_local([random_unitary(2, rng)]), psi0))
    assert rep.ok and rep.C_squared <= 1e-9 and rep.E2_closed > 0


def test_monogamy_random_sweep(rng):
    for _ in range(100):
        p = rng.uniform()
        b = random_unitary(2, rng)
        a = random_unitary(2, rng)
        psi0 = np.sqrt(p) * kron(a[:, 0], b[:, 0]) + np.sqrt(1 - p) * kron(a[:, 1], b[:, 1])
        hs = build_history(_local([random_unitary(2, rng)]), psi0)
        rep = monogamy_check(hs)
        assert rep.ok
        assert rep.E2_closed >= rep.C_squared - 1e-9
        assert abs(rep.E2_dense - quadratic_entanglement(hs)) <= 1e-14


def test_subsystem_errors(rng):
    hs = build_history(_local([random_unitary(2, rng)]), random_state(4, rng))
    with pytest.raises(BadSplit):
        reduce_to_BT(hs, (3, 2))
    with pytest.raises(BadSplit):
        reduce_to_BT(hs, "ab")
    with pytest.raises(NotLocalEvolution):
        monogamy_check(build_history(UnitarySchedule.constant(random_unitary(4, rng), 2), random_state(4, rng)))
    wide = build_history(_local([random_unitary(2, rng)] * 2), random_state(4, rng))
    with pytest.raises(Unsupported):
        concurrence_BT(reduce_to_BT(wide, (2, 2)))
