import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dense_oracle import op_matrix, single
from qdd.circuit import GateOp
from qdd.core import Manager, node_count
from qdd.matrix import (
    add,
    conjugate_transpose,
    controlled_gate,
    from_matrix,
    gate_operator,
    get_entry,
    identity,
    kron,
    mat_mat_mul,
    mat_vec_mul,
    single_qubit_gate,
    to_matrix,
    two_qubit_gate,
)
from qdd.vector import from_amplitudes, to_amplitudes

R2 = 1 / math.sqrt(2)
cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def matrices(n):
    return arrays(complex, (1 << n, 1 << n), elements=cplx)


def test_kron_h_identity():
    m = Manager()
    h = from_matrix(single("h"), m)
    u = kron(h, identity(1, m))
    assert get_entry(u, 2, 0) == pytest.approx(R2, abs=1e-12)
    want = R2 * np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]])
    np.testing.assert_allclose(to_matrix(u), want, atol=1e-12)


def test_identity_is_linear():
    for n in range(1, 8):
        assert node_count(identity(n).root) == n


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(matrices(n), matrices(n))))
def test_algebra_matches_numpy(pair):
    a, b = pair
    m = Manager()
    da, db = from_matrix(a, m), from_matrix(b, m)
    np.testing.assert_allclose(to_matrix(da), a, atol=1e-10)
    np.testing.assert_allclose(to_matrix(add(da, db)), a + b, atol=1e-9)
    np.testing.assert_allclose(to_matrix(mat_mat_mul(da, db)), a @ b, atol=1e-9)
    np.testing.assert_allclose(to_matrix(conjugate_transpose(da)), a.conj().T, atol=1e-10)
    v = b[:, 0]
    np.testing.assert_allclose(to_amplitudes(mat_vec_mul(da, from_amplitudes(v, m))), a @ v, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(matrices(1), matrices(2))
def test_kron_matches_numpy(a, b):
    m = Manager()
    u = kron(from_matrix(a, m), from_matrix(b, m))
    np.testing.assert_allclose(to_matrix(u), np.kron(a, b), atol=1e-9)


def test_kron_of_states():
    m = Manager()
    a = from_amplitudes([0.6, 0.8j], m)
    b = from_amplitudes([R2, 0, 0, -R2], m)
    np.testing.assert_allclose(to_amplitudes(kron(a, b)), np.kron([0.6, 0.8j], [R2, 0, 0, -R2]), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_single_qubit_gates_match_oracle(n):
    m = Manager()
    for q in range(n):
        for kind in ("h", "x", "y", "s", "t"):
            u = single_qubit_gate(n, q, single(kind), m)
            np.testing.assert_allclose(to_matrix(u), op_matrix(n, kind, (q,)), atol=1e-12)


def test_controlled_gates_match_oracle():
    m = Manager()
    n = 4
    cases = [((0,), 1), ((3,), 0), ((1,), 2), ((0, 3), 2), ((2, 3), 0), ((0, 1, 2), 3)]
    for controls, t in cases:
        for kind, params in (("x", ()), ("p", (0.7,)), ("ry", (-1.1,))):
            u = controlled_gate(n, controls, t, single(kind, params), m)
            np.testing.assert_allclose(
                to_matrix(u), op_matrix(n, kind, (t,), controls, params), atol=1e-12
            )


def test_swap_matches_oracle():
    m = Manager()
    for a, b in ((0, 1), (2, 0), (1, 3)):
        u = gate_operator(GateOp("swap", (a, b)), 4, m)
        np.testing.assert_allclose(to_matrix(u), op_matrix(4, "swap", (a, b)), atol=1e-12)


def test_two_qubit_gate_operand_order():
    m = Manager()
    # CNOT as a 4x4 with the control as the more significant bit
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    for c, t in ((1, 0), (0, 1), (2, 0)):
        u = two_qubit_gate(3, c, t, cnot, m)
        np.testing.assert_allclose(to_matrix(u), op_matrix(3, "x", (t,), (c,)), atol=1e-12)


def test_cnot_structure():
    u = controlled_gate(2, (1,), 0, single("x"))
    np.testing.assert_array_equal(
        to_matrix(u).real, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    )


def test_errors():
    m = Manager()
    with pytest.raises(ValueError):
        from_matrix(np.eye(3), m)
    with pytest.raises(ValueError):
        mat_mat_mul(identity(2, m), identity(3, m))
    with pytest.raises(ValueError):
        controlled_gate(2, (0,), 0, single("x"), m)
    with pytest.raises(ValueError):
        get_entry(identity(1, m), 2, 0)
    with pytest.raises(ValueError):
        to_matrix(identity(11, m))
    with pytest.raises(TypeError):
        add(identity(1, m), from_amplitudes([1, 0], m))


def test_cache_on_off_agree_exactly():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    out = []
    for enabled in (True, False):
        m = Manager(cache_enabled=enabled)
        out.append(to_matrix(mat_mat_mul(from_matrix(a, m), from_matrix(b, m))))
    np.testing.assert_array_equal(out[0], out[1])
