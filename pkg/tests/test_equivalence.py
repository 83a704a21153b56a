import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dense_oracle import equal_up_to_phase, op_matrix, random_circuit, statevector, unitary
from reference_circuits import qft3, qft3_alt, qft_matrix
from qdd.circuit import GateOp, QuantumCircuit
from qdd.core import Manager, node_count
from qdd.equivalence import (
    Strategy,
    Verdict,
    check_alternating,
    check_construction,
    check_simulation,
    choose_stimuli,
    difference_matrix,
    invert_gate,
    phase_equivalent,
    system_matrix,
)
from qdd.matrix import from_matrix, mat_mat_mul, scale, to_matrix


def prepend(op: GateOp, c: QuantumCircuit) -> QuantumCircuit:
    """``op`` first in time, so the system matrix becomes U_c * op."""
    return QuantumCircuit(c.num_qubits, [op] + list(c.ops))


def test_invert_gate():
    assert invert_gate(GateOp("t", (0,))) == GateOp("tdg", (0,))
    assert invert_gate(GateOp("x", (0,), (1,))) == GateOp("x", (0,), (1,))
    assert invert_gate(GateOp("rz", (1,), (), (math.pi / 8,))).params == (-math.pi / 8,)
    for kind, params in [("s", ()), ("h", ()), ("rx", (0.3,)), ("ry", (1.2,)), ("p", (-2.0,)), ("swap", ())]:
        targets = (0, 1) if kind == "swap" else (1,)
        g = GateOp(kind, targets, (), params)
        a = op_matrix(2, g.kind, g.targets, g.controls, g.params)
        inv = invert_gate(g)
        b = op_matrix(2, inv.kind, inv.targets, inv.controls, inv.params)
        np.testing.assert_allclose(b @ a, np.eye(4), atol=1e-12)


def test_system_matrix_of_qft():
    m = Manager()
    u = system_matrix(qft3(), m)
    np.testing.assert_allclose(to_matrix(u), qft_matrix(), atol=1e-10)
    np.testing.assert_allclose(to_matrix(system_matrix(qft3_alt(), m)), qft_matrix(), atol=1e-10)
    assert node_count(system_matrix(QuantumCircuit(4), m).root) == 4


def test_phase_equivalent_examples():
    m = Manager()
    u = system_matrix(qft3(), m)
    assert phase_equivalent(u, u) == (Verdict.EQUIVALENT, 0.0)
    verdict, alpha = phase_equivalent(u, scale(u, cmath.exp(1j * math.pi / 4)))
    assert verdict == Verdict.EQUIVALENT_UP_TO_PHASE
    assert alpha == pytest.approx(math.pi / 4, abs=1e-12)
    no_swap = QuantumCircuit(3, qft3().ops[:-1])
    assert phase_equivalent(u, system_matrix(no_swap, m))[0] == Verdict.NON_EQUIVALENT


def test_phase_equivalent_across_managers():
    u = system_matrix(qft3(), Manager())
    v = system_matrix(qft3_alt(), Manager())
    assert phase_equivalent(u, v)[0] == Verdict.EQUIVALENT


def test_global_phase_detected():
    m = Manager()
    # rz(t) = e^{-it/2} p(t): equal up to a global phase
    a = QuantumCircuit(2).rz(0.8, 1).h(0)
    b = QuantumCircuit(2).p(0.8, 1).h(0)
    res = check_construction(a, b, m)
    assert res.verdict == Verdict.EQUIVALENT_UP_TO_PHASE
    assert res.global_phase == pytest.approx(0.4, abs=1e-12)
    alt = check_alternating(a, b, mgr=m)
    assert alt.verdict == Verdict.EQUIVALENT_UP_TO_PHASE
    # the alternating check ends at U U'^dagger = e^{-i alpha}
    assert alt.global_phase == pytest.approx(2 * math.pi - 0.4, abs=1e-12)


@pytest.mark.parametrize("strategy", list(Strategy))
def test_qft_alternating_all_strategies(strategy):
    m = Manager()
    res = check_alternating(qft3(), qft3_alt(), strategy, m)
    assert res.verdict.passed and res.verdict != Verdict.PROBABLY_EQUIVALENT
    assert res.stats["final_nodes"] == 3
    assert res.stats["applied_left"] == 7 and res.stats["applied_right"] == 21
    bad = check_alternating(qft3(), qft3_alt(drop_t=True), strategy, m)
    assert bad.verdict == Verdict.NON_EQUIVALENT


def test_barrier_guided_peak_below_full_qft():
    m = Manager()
    res = check_alternating(qft3(), qft3_alt(), Strategy.BARRIER_GUIDED, m)
    assert res.stats["peak_nodes"] < node_count(system_matrix(qft3(), m).root)


def test_barrier_guided_falls_back_without_barriers():
    res = check_alternating(qft3(), qft3(), Strategy.BARRIER_GUIDED)
    assert res.stats["strategy"] == "proportional"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_verdicts_match_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    g = random_circuit(rng, n, int(rng.integers(1, 20)), barriers=True)
    if rng.random() < 0.5:
        g2 = g.copy()
    else:
        g2 = random_circuit(rng, n, int(rng.integers(1, 20)), barriers=True)
    truth = equal_up_to_phase(unitary(g), unitary(g2))
    m = Manager()
    for strategy in Strategy:
        assert check_alternating(g, g2, strategy, m).verdict.passed == truth
    assert check_construction(g, g2, m).verdict.passed == truth


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_self_check_reaches_identity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    c = random_circuit(rng, n, 25)
    res = check_alternating(c, c, Strategy.ONE_TO_ONE)
    assert res.verdict == Verdict.EQUIVALENT
    assert res.stats["final_nodes"] == n


def test_counterexample_is_valid():
    rng = np.random.default_rng(7)
    g = random_circuit(rng, 3, 15)
    g2 = prepend(GateOp("x", (2,), (0,)), g)
    res = check_simulation(g, g2, 8, seed=1)
    assert res.verdict == Verdict.NON_EQUIVALENT
    i, f = res.counterexample
    dense_f = abs(np.vdot(statevector(g, i), statevector(g2, i))) ** 2
    assert f == pytest.approx(dense_f, abs=1e-9)
    assert f < 1 - 1e-10


def test_identical_circuits_probably_equivalent():
    rng = np.random.default_rng(1)
    c = random_circuit(rng, 4, 20)
    res = check_simulation(c, c, 16, seed=0)
    assert res.verdict == Verdict.PROBABLY_EQUIVALENT
    assert res.stats["stimuli_passed"] == 16
    assert res.stats["min_fidelity"] >= 1 - 1e-10
    assert res.counterexample is None


def test_single_qubit_difference_detected_by_every_stimulus():
    rng = np.random.default_rng(2)
    g = random_circuit(rng, 3, 15)
    g2 = prepend(GateOp("x", (0,)), g)
    for i in range(8):
        res = check_simulation(g, g2, 1, seed=i)
        assert res.verdict == Verdict.NON_EQUIVALENT


def _differing_columns(d, tol=1e-9):
    return [j for j in range(d.shape[1]) if not np.allclose(d[:, j], np.eye(len(d))[:, j], atol=tol)]


@pytest.mark.parametrize("controls", [(), (1,), (1, 2), (0, 1, 3)])
def test_difference_columns(controls):
    n = 4
    rng = np.random.default_rng(len(controls))
    g = random_circuit(rng, n, 20)
    target = next(q for q in range(n) if q not in controls)
    g2 = prepend(GateOp("x", (target,), tuple(controls)), g)
    m = Manager()
    d = difference_matrix(g, g2, m)
    assert len(_differing_columns(to_matrix(d))) == 2 ** (n - len(controls))
    u = system_matrix(g, m)
    np.testing.assert_allclose(to_matrix(mat_mat_mul(u, d)), to_matrix(system_matrix(g2, m)), atol=1e-9)


def test_difference_of_identical_circuits_is_identity():
    rng = np.random.default_rng(5)
    c = random_circuit(rng, 3, 12)
    d = difference_matrix(c, c)
    np.testing.assert_allclose(to_matrix(d), np.eye(8), atol=1e-10)
    assert node_count(d.root) == 3


def test_worst_case_detection_rate_n4():
    n = 4
    hits = 0
    trials = 800
    for t in range(trials):
        rng = np.random.default_rng(1000 + t)
        g = random_circuit(rng, n, 10)
        g2 = prepend(GateOp("x", (0,), (1, 2, 3)), g)
        if check_simulation(g, g2, 1, seed=t).verdict == Verdict.NON_EQUIVALENT:
            hits += 1
    # expected 2/16; three binomial standard deviations is about 0.035
    assert abs(hits / trials - 2 / 16) < 0.035


def test_choose_stimuli_distinct():
    rng = np.random.default_rng(0)
    s = choose_stimuli(3, 8, rng)
    assert sorted(s) == list(range(8))
    big = choose_stimuli(30, 50, rng)
    assert len(set(big)) == 50
    with pytest.raises(ValueError):
        choose_stimuli(2, 5, rng)


def test_qubit_mismatch():
    with pytest.raises(ValueError):
        check_alternating(QuantumCircuit(2), QuantumCircuit(3))
    with pytest.raises(ValueError):
        check_simulation(QuantumCircuit(2), QuantumCircuit(3))


def test_measurements_rejected():
    c = QuantumCircuit(1).h(0).measure(0, 0)
    with pytest.raises(ValueError):
        system_matrix(c)


def test_from_matrix_phase_invariance():
    # a random unitary and a phase-shifted copy share their structure
    rng = np.random.default_rng(9)
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    m = Manager()
    a = from_matrix(q, m)
    b = from_matrix(q * cmath.exp(0.3j), m)
    verdict, alpha = phase_equivalent(a, b)
    assert verdict == Verdict.EQUIVALENT_UP_TO_PHASE
    assert alpha == pytest.approx(0.3, abs=1e-12)
