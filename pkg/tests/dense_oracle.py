"""Dense numpy reference implementation used as a test oracle.

Nothing here imports the DD engine's gate tables or algebra, so agreement is
evidence of correctness rather than self-consistency.  Qubit k is bit k of a
basis index; q_{n-1} is the most significant bit.
"""
import math

import numpy as np

from qdd.circuit import Barrier, GateOp, QuantumCircuit

R2 = 1 / math.sqrt(2)

BASE = {
    "id": [[1, 0], [0, 1]],
    "x": [[0, 1], [1, 0]],
    "y": [[0, -1j], [1j, 0]],
    "z": [[1, 0], [0, -1]],
    "h": [[R2, R2], [R2, -R2]],
    "s": [[1, 0], [0, 1j]],
    "sdg": [[1, 0], [0, -1j]],
    "t": [[1, 0], [0, np.exp(1j * math.pi / 4)]],
    "tdg": [[1, 0], [0, np.exp(-1j * math.pi / 4)]],
}


def single(kind, params=()):
    if kind in BASE:
        return np.array(BASE[kind], dtype=complex)
    (th,) = params
    if kind == "rx":
        return np.array(
            [[math.cos(th / 2), -1j * math.sin(th / 2)], [-1j * math.sin(th / 2), math.cos(th / 2)]]
        )
    if kind == "ry":
        return np.array([[math.cos(th / 2), -math.sin(th / 2)], [math.sin(th / 2), math.cos(th / 2)]], dtype=complex)
    if kind == "rz":
        return np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)])
    if kind == "p":
        return np.diag([1, np.exp(1j * th)])
    raise KeyError(kind)


def op_matrix(n, kind, targets, controls=(), params=()):
    """Full 2^n x 2^n matrix built column by column."""
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        if any(not (j >> c) & 1 for c in controls):
            m[j, j] = 1
            continue
        if kind == "swap":
            a, b = targets
            ba, bb = (j >> a) & 1, (j >> b) & 1
            i = j & ~(1 << a) & ~(1 << b) | (bb << a) | (ba << b)
            m[i, j] = 1
            continue
        (t,) = targets
        g = single(kind, params)
        b = (j >> t) & 1
        for out in (0, 1):
            m[(j & ~(1 << t)) | (out << t), j] += g[out, b]
    return m


def unitary(c: QuantumCircuit):
    u = np.eye(1 << c.num_qubits, dtype=complex)
    for op in c.ops:
        if isinstance(op, GateOp):
            u = op_matrix(c.num_qubits, op.kind, op.targets, op.controls, op.params) @ u
    return u


def statevector(c: QuantumCircuit, initial: int = 0):
    v = np.zeros(1 << c.num_qubits, dtype=complex)
    v[initial] = 1
    for op in c.ops:
        if isinstance(op, GateOp):
            v = op_matrix(c.num_qubits, op.kind, op.targets, op.controls, op.params) @ v
    return v


def equal_up_to_phase(a, b, tol=1e-9):
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(b[k]) < tol:
        return False
    ph = b[k] / a[k]
    if abs(abs(ph) - 1) > tol:
        return False
    return np.allclose(a * ph, b, atol=tol, rtol=0)


def apply_kraus(rho, ops):
    return sum(e @ rho @ e.conj().T for e in ops)


ONE_QUBIT = ["h", "x", "y", "z", "s", "t", "rz"]


def random_circuit(rng, n, depth, kinds=None, two_qubit=0.3, barriers=False):
    """Random circuit over H, X, Y, Z, S, T, Rz and CNOT (``kinds`` to override)."""
    kinds = kinds or ONE_QUBIT
    c = QuantumCircuit(n)
    for _ in range(depth):
        if n > 1 and rng.random() < two_qubit:
            a, b = rng.choice(n, 2, replace=False)
            c.cx(int(a), int(b))
        else:
            k = kinds[rng.integers(len(kinds))]
            q = int(rng.integers(n))
            params = (float(rng.uniform(-math.pi, math.pi)),) if k in ("rx", "ry", "rz", "p") else ()
            c.gate(k, q, params=params)
        if barriers and rng.random() < 0.2:
            c.append(Barrier(tuple(range(n))))
    return c
