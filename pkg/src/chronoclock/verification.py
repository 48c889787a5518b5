"""Analytic-versus-numeric cross-checks behind ``chronoclock run verify``.

Each check draws its randomness from ``default_rng([seed, index])`` so the
outcome does not depend on which other checks run or in which order. Details
carry no timings, keeping reports byte-identical across reruns; the runtime
budgets of the first two checks only affect pass/fail.
"""
from __future__ import annotations

import math
import time
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from . import energy_time as et
from .entanglement import entanglement_entropy, permanence_profile, periodic_reduction, quadratic_entanglement, schmidt
from .history import UnitarySchedule, build_history, fidelity, history_from_branches, simulate_circuit
from .linalg import random_hermitian, random_state, random_unitary
from .scenarios import bloch_closed_form, bloch_limit, bloch_path, qubit_clock, small_step_expansion, two_level_exact
from .subsystem import concurrence_fidelity_identity, monogamy_check
from .translation import build_superoperator, generator_j, hermitian_parts


class CheckResult(NamedTuple):
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str


def _result(name: str, worst: float, tolerance: float, detail: str = "", extra_ok: bool = True) -> CheckResult:
    return CheckResult(name, bool(worst <= tolerance and extra_ok), float(worst), tolerance, detail)


def check_bloch_table(rng: np.random.Generator) -> CheckResult:
    start = time.perf_counter()
    worst = 0.0
    for phi in (0.1, 0.5, 1.0, math.pi / 2, 2.0, math.pi):
        for n in (2, 3, 4, 8, 16, 64):
            r = bloch_path(phi, n)
            worst = max(worst, abs(r.E2_dense - r.E2_N))
    single = abs(bloch_closed_form(math.pi / 2, 2) - 1.0)
    limit = abs(bloch_limit(math.pi / 2) - (1 - 4 / math.pi**2))
    elapsed = time.perf_counter() - start
    ok = single <= 1e-12 and limit <= 1e-12 and elapsed < 10
    return _result("bloch-table", worst, 1e-9, f"N=2 dev {single:.2g}, limit dev {limit:.2g}", ok)


def check_circuit(rng: np.random.Generator) -> CheckResult:
    start = time.perf_counter()
    worst = 0.0
    for i in range(50):
        m, n = (2, 4)[i % 2], 1 + i % 6
        h = random_hermitian(m, rng)
        if i % 4 < 2:
            gen = UnitarySchedule.from_hamiltonian_matrix(h, 1 << n)
        else:
            gen = UnitarySchedule.constant(scipy.linalg.expm(-1j * h), 1 << n)
        psi0 = random_state(m, rng)
        worst = max(worst, 1 - fidelity(simulate_circuit(gen, psi0, n), build_history(gen, psi0)))
    elapsed = time.perf_counter() - start
    return _result("circuit-dense", worst, 1e-12, "", elapsed < 30)


def check_invariance(rng: np.random.Generator) -> CheckResult:
    w_res = j_res = h_res = 0.0
    degenerate_ok = True
    for _ in range(20):
        n, m = int(rng.integers(2, 9)), int(rng.integers(1, 4))
        sched = UnitarySchedule.explicit([random_unitary(m, rng) for _ in range(n - 1)])
        hs = build_history(sched, random_state(m, rng))
        su = build_superoperator(sched)
        gj = generator_j(su)
        up, um = hermitian_parts(su)
        w_res = max(w_res, np.abs(su.op @ hs.joint - hs.joint).max())
        j_res = max(j_res, np.abs(gj.op @ hs.joint).max())
        h_res = max(h_res, np.abs(up @ hs.joint - hs.joint).max(), np.abs(um @ hs.joint).max())
        degenerate_ok &= bool(np.all(gj.multiplicities == m) and gj.grid_deviation <= 1e-7)
    ok = w_res <= 1e-11 and j_res <= 1e-8 and degenerate_ok
    return _result("invariance", h_res, 1e-10, f"W {w_res:.2g}, J {j_res:.2g}, degeneracy {degenerate_ok}", ok)


def _random_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    return random_state(n, rng)


def check_cyclic_extremality(rng: np.random.Generator) -> CheckResult:
    eq_dev = excess = 0.0
    for n in (2, 4, 8):
        ladder = 2 * np.pi * np.arange(n) / n
        for _ in range(20):
            c = _random_weights(n, rng)
            bound = entanglement_entropy(np.abs(c) ** 2)
            for shift in (0.0, 0.7):
                hs = build_history(UnitarySchedule.hamiltonian(ladder + shift, n), c)
                eq_dev = max(eq_dev, abs(entanglement_entropy(schmidt(hs)) - bound))
            for _ in range(20):
                energies = rng.uniform(0, 2 * np.pi, n)
                hs = build_history(UnitarySchedule.hamiltonian(energies, n), c)
                excess = max(excess, entanglement_entropy(schmidt(hs)) - bound)
    return _result("cyclic-extremality", eq_dev, 1e-9, f"max excess {excess:.2g}", excess <= 1e-9)


def check_majorization(rng: np.random.Generator) -> CheckResult:
    worst = -math.inf
    failures = 0
    for _ in range(200):
        m, n = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        h = random_hermitian(m, rng)
        psi0 = random_state(m, rng)
        spread = et.spectral_spread(h, psi0, n)
        sd = schmidt(build_history(UnitarySchedule.from_hamiltonian_matrix(h, n), psi0))
        maj = et.majorization_check(spread, sd)
        reports = [et.schur_bound_check(spread, sd, f) for f in et.ENTROPIC_FORMS.values()]
        worst = max([worst, maj.max_violation] + [-r.gap for r in reports])
        failures += (not maj.ok) + sum(not r.ok for r in reports)
    return _result("majorization-schur", worst, 1e-9, f"{failures} violations", failures == 0)


def check_uncertainty(rng: np.random.Generator) -> CheckResult:
    worst = -math.inf
    failures = 0
    for i in range(200):
        n = (2, 4, 8, 16)[i % 4]
        c = _random_weights(n, rng)
        if i % 3 == 0:
            mask = rng.random(n) < 0.5
            mask[rng.integers(n)] = True
            c = np.where(mask, c, 0)
            c = c / np.linalg.norm(c)
        spread = et.spectral_spread(np.diag(2 * np.pi * np.arange(n) / n), c, n)
        rep = et.uncertainty_relation(spread)
        worst = max(worst, rep.bound - rep.total)
        failures += not rep.ok
    end_dev = 0.0
    for n in (2, 4, 8, 16):
        h = np.diag(2 * np.pi * np.arange(n) / n)
        delta = et.uncertainty_relation(et.spectral_spread(h, np.eye(n)[0], n))
        uniform = et.uncertainty_relation(et.spectral_spread(h, np.ones(n) / np.sqrt(n), n))
        end_dev = max(end_dev, abs(delta.E), abs(delta.E_tilde - math.log2(n)),
                      abs(uniform.E - math.log2(n)), abs(uniform.E_tilde))
    ok = failures == 0 and end_dev <= 1e-12
    return _result("uncertainty", max(worst, 0.0), 1e-9, f"{failures} violations, endpoint dev {end_dev:.2g}", ok)


def check_qubit_clock(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for i in range(100):
        m = (2, 3, 4)[i % 3]
        psi0, u = random_state(m, rng), random_unitary(m, rng)
        res = qubit_clock(psi0, u)
        hs = build_history(UnitarySchedule.constant(u, 2), psi0)
        p = schmidt(hs).coefficients
        worst = max(worst, abs(p[0] - res.p_plus), abs(p[1] - res.p_minus),
                    abs(quadratic_entanglement(hs) - res.E2))
    two_level = 0.0
    for _ in range(20):
        gap = rng.uniform(0.1, 3)
        psi0 = random_state(2, rng)
        eps = rng.uniform(0.01, 2)
        s = small_step_expansion(np.diag([0.0, gap]), psi0, eps)
        w = np.abs(psi0) ** 2
        two_level = max(two_level, abs(s.E2_exact - two_level_exact(eps, gap, w[0], w[1])))
        sat = small_step_expansion(np.diag([0.0, gap]), psi0, math.pi / gap)
        two_level = max(two_level, abs(sat.E2_exact - 4 * w[0] * w[1]))
    return _result("qubit-clock", max(worst, two_level), 1e-10, f"closed forms {worst:.2g}, two-level {two_level:.2g}")


def check_concurrence(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    failures = 0
    for _ in range(100):
        p, b0, ub = rng.random(), random_state(2, rng), random_unitary(2, rng)
        rep = concurrence_fidelity_identity(p, b0, ub)
        worst = max(worst, abs(rep.C_squared - rep.closed_form_overlap), abs(rep.C_squared - rep.closed_form_fidelity))
        failures += not rep.ok
        b1 = np.array([-np.conj(b0[1]), np.conj(b0[0])])
        psi0 = np.sqrt(p) * np.kron([1, 0], b0) + np.sqrt(1 - p) * np.kron([0, 1], b1)
        mono = monogamy_check(build_history(UnitarySchedule.constant(np.kron(np.eye(2), ub), 2), psi0))
        failures += not mono.ok
    half = concurrence_fidelity_identity(0.5, random_state(2, rng), random_unitary(2, rng)).C
    return _result("concurrence", worst, 1e-9, f"{failures} failures, C(p=1/2)={half:.2g}",
                   failures == 0 and half <= 1e-9)


def _periodic_branches(n: int, period: int, gamma: float, m: int, rng) -> np.ndarray:
    base = [random_state(m, rng) for _ in range(period)]
    return np.array([np.exp(1j * gamma * (t // period)) * base[t % period] for t in range(n)])


def check_periodic(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for period in (2, 4):
        for _ in range(5):
            gamma = rng.uniform(0, 2 * np.pi)
            hs = history_from_branches(_periodic_branches(8, period, gamma, 3, rng))
            rep = periodic_reduction(hs, period, gamma)
            worst = max(worst, abs(rep.E_vn - entanglement_entropy(schmidt(hs))))
    return _result("periodic-reduction", worst, 1e-9)


def check_permanence(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(2, 13))
        rays = random_unitary(m, rng).T
        labels = rng.integers(0, m, n)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        hs = history_from_branches(phases[:, None] * rays[labels])
        clusters = permanence_profile(hs)
        counts = np.sort([c.count for c in clusters])[::-1]
        p = np.sort(schmidt(hs).coefficients)[::-1][: counts.size]
        worst = max(worst, np.abs(p - counts / n).max())
    return _result("permanence", worst, 1e-9)


CHECKS: dict[str, Callable[[np.random.Generator], CheckResult]] = {
    "bloch-table": check_bloch_table,
    "circuit-dense": check_circuit,
    "invariance": check_invariance,
    "cyclic-extremality": check_cyclic_extremality,
    "majorization-schur": check_majorization,
    "uncertainty": check_uncertainty,
    "qubit-clock": check_qubit_clock,
    "concurrence": check_concurrence,
    "periodic-reduction": check_periodic,
    "permanence": check_permanence,
}


def run_check(name: str, seed: int) -> CheckResult:
    index = list(CHECKS).index(name)
    rng = np.random.default_rng([seed, index])
    try:
        return CHECKS[name](rng)
    except ArithmeticError as exc:
        return CheckResult(name, False, math.inf, 0.0, f"{type(exc).__name__}: {exc}")
