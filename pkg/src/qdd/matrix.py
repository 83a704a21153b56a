"""Operator decision diagrams: gate construction and matrix algebra.

Entry indexing: the node at level ``k`` consumes bit ``k`` of both the row and
the column index; successors are ordered (row 0/col 0, row 0/col 1,
row 1/col 0, row 1/col 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import GateOp, gate_matrix
from .core import ONE_EDGE, TERMINAL, ZERO_EDGE, Edge, Manager, default_manager
from .vector import StateDD, _check_same

I2 = np.eye(2, dtype=complex)
M0 = np.array([[1, 0], [0, 0]], dtype=complex)
M1 = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class OperatorDD:
    root: Edge
    num_qubits: int
    mgr: Manager

    def __repr__(self):
        return f"OperatorDD(n={self.num_qubits}, root_weight={self.root.w})"


def _mgr(mgr):
    return default_manager() if mgr is None else mgr


def _scaled(mgr: Manager, r: Edge, factor: complex) -> Edge:
    if r.w == 0:
        return ZERO_EDGE
    return mgr.edge(r.node, r.w * factor)


def _make(mgr: Manager, v: int, children) -> Edge:
    if len(children) == 2:
        return mgr.make_vector_node(v, children[0], children[1])
    return mgr.make_matrix_node(v, children)


# -- edge-level recursions ----------------------------------------------------


def add_edges(mgr: Manager, x: Edge, y: Edge) -> Edge:
    """Elementwise sum of two vector or two matrix DDs of equal height."""
    if x.w == 0:
        return y
    if y.w == 0:
        return x
    if x.node is y.node:
        return mgr.edge(x.node, x.w + y.w)
    ratio = mgr.cn(y.w / x.w)
    return _scaled(mgr, _add_nodes(mgr, x.node, y.node, ratio), x.w)


def _add_nodes(mgr: Manager, xn, yn, ratio: complex) -> Edge:
    """x + ratio * y for unit-weight edges into ``xn`` and ``yn``."""
    if ratio == 0:
        return Edge(xn, 1 + 0j)
    cache = mgr.cache("add")
    key = (xn, yn, ratio)
    r = cache.get(key)
    if r is not None:
        return r
    children = [
        add_edges(mgr, a, Edge(b.node, b.w * ratio) if b.w != 0 else b)
        for a, b in zip(xn.e, yn.e)
    ]
    r = _make(mgr, xn.v, children)
    cache.put(key, r)
    return r


def mat_vec_edges(mgr: Manager, x: Edge, y: Edge) -> Edge:
    if x.w == 0 or y.w == 0:
        return ZERO_EDGE
    xn = x.node
    yn = y.node
    if xn is TERMINAL:
        return mgr.edge(TERMINAL, x.w * y.w)
    cache = mgr.cache("mv")
    key = (xn, yn)
    r = cache.get(key)
    if r is None:
        a = xn.e
        b = yn.e
        r0 = add_edges(mgr, mat_vec_edges(mgr, a[0], b[0]), mat_vec_edges(mgr, a[1], b[1]))
        r1 = add_edges(mgr, mat_vec_edges(mgr, a[2], b[0]), mat_vec_edges(mgr, a[3], b[1]))
        r = mgr.make_vector_node(xn.v, r0, r1)
        cache.put(key, r)
    return _scaled(mgr, r, x.w * y.w)


def mat_mat_edges(mgr: Manager, x: Edge, y: Edge) -> Edge:
    if x.w == 0 or y.w == 0:
        return ZERO_EDGE
    xn = x.node
    yn = y.node
    if xn is TERMINAL:
        return mgr.edge(TERMINAL, x.w * y.w)
    cache = mgr.cache("mm")
    key = (xn, yn)
    r = cache.get(key)
    if r is None:
        a = xn.e
        b = yn.e
        children = []
        for i in (0, 2):
            for j in (0, 1):
                children.append(
                    add_edges(
                        mgr,
                        mat_mat_edges(mgr, a[i], b[j]),
                        mat_mat_edges(mgr, a[i + 1], b[j + 2]),
                    )
                )
        r = mgr.make_matrix_node(xn.v, children)
        cache.put(key, r)
    return _scaled(mgr, r, x.w * y.w)


def kron_edges(mgr: Manager, a: Edge, b: Edge, shift: int) -> Edge:
    """Substitute ``b`` for the terminal of ``a``; ``a``'s levels move up by ``shift``."""
    if a.w == 0 or b.w == 0:
        return ZERO_EDGE
    return _scaled(mgr, _kron_nodes(mgr, a.node, b.node, shift), a.w * b.w)


def _kron_nodes(mgr: Manager, an, bn, shift: int) -> Edge:
    if an is TERMINAL:
        return Edge(bn, 1 + 0j)
    cache = mgr.cache("kron")
    key = (an, bn, shift)
    r = cache.get(key)
    if r is not None:
        return r
    children = []
    for c in an.e:
        if c.w == 0:
            children.append(ZERO_EDGE)
        else:
            children.append(_scaled(mgr, _kron_nodes(mgr, c.node, bn, shift), c.w))
    r = _make(mgr, an.v + shift, children)
    cache.put(key, r)
    return r


def conj_transpose_edge(mgr: Manager, x: Edge) -> Edge:
    if x.w == 0:
        return ZERO_EDGE
    if x.node is TERMINAL:
        return mgr.edge(TERMINAL, x.w.conjugate())
    cache = mgr.cache("ct")
    r = cache.get(x.node)
    if r is None:
        e = x.node.e
        r = mgr.make_matrix_node(
            x.node.v,
            [conj_transpose_edge(mgr, e[k]) for k in (0, 2, 1, 3)],
        )
        cache.put(x.node, r)
    return _scaled(mgr, r, x.w.conjugate())


# -- public operator API ------------------------------------------------------


def from_matrix(m, mgr: Manager | None = None) -> OperatorDD:
    """Build the DD of a dense 2^n x 2^n matrix."""
    mgr = _mgr(mgr)
    m = np.asarray(m, dtype=complex)
    size = m.shape[0]
    n = size.bit_length() - 1
    if m.ndim != 2 or m.shape != (size, size) or size < 2 or 1 << n != size:
        raise ValueError(f"shape {m.shape} is not square with a power-of-two side >= 2")

    def build(level: int, r: int, c: int) -> Edge:
        if level < 0:
            return mgr.edge(TERMINAL, complex(m[r, c]))
        h = 1 << level
        kids = [build(level - 1, r + i * h, c + j * h) for i in (0, 1) for j in (0, 1)]
        return mgr.make_matrix_node(level, kids)

    return OperatorDD(build(n - 1, 0, 0), n, mgr)


def identity(n: int, mgr: Manager | None = None) -> OperatorDD:
    return product_operator(n, {}, mgr)


def product_operator(n: int, factors: dict, mgr: Manager | None = None) -> OperatorDD:
    """Tensor product placing ``factors[q]`` (2x2) on qubit ``q``, identity elsewhere."""
    mgr = _mgr(mgr)
    if n < 1:
        raise ValueError("need at least one qubit")
    for q in factors:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    e = ONE_EDGE
    for level in range(n):
        m = factors.get(level)
        if m is None:
            e = mgr.make_matrix_node(level, [e, ZERO_EDGE, ZERO_EDGE, e])
            continue
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("factor matrices must be 2x2")
        e = mgr.make_matrix_node(
            level, [_scaled(mgr, e, complex(m[i, j])) for i in (0, 1) for j in (0, 1)]
        )
    return OperatorDD(e, n, mgr)


def single_qubit_gate(n: int, target: int, g, mgr: Manager | None = None) -> OperatorDD:
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for {n} qubits")
    return product_operator(n, {target: g}, mgr)


def controlled_gate(n: int, controls, target: int, g, mgr: Manager | None = None) -> OperatorDD:
    """Apply ``g`` on ``target`` iff every qubit in ``controls`` is |1>."""
    mgr = _mgr(mgr)
    controls = frozenset(controls)
    if not controls:
        return single_qubit_gate(n, target, g, mgr)
    if target in controls:
        raise ValueError("target overlaps controls")
    if not 0 <= target < n or any(not 0 <= c < n for c in controls):
        raise ValueError("qubit index out of range")
    g = np.asarray(g, dtype=complex)
    zero = ZERO_EDGE
    # below the target: ``proj`` = lower controls all satisfied, ``rest`` = complement
    ident = ONE_EDGE
    proj = ONE_EDGE
    rest = ZERO_EDGE
    for level in range(target):
        if level in controls:
            proj = mgr.make_matrix_node(level, [zero, zero, zero, proj])
            rest = mgr.make_matrix_node(level, [ident, zero, zero, rest])
        else:
            proj = mgr.make_matrix_node(level, [proj, zero, zero, proj])
            rest = mgr.make_matrix_node(level, [rest, zero, zero, rest])
        ident = mgr.make_matrix_node(level, [ident, zero, zero, ident])
    blocks = []
    for i in (0, 1):
        for j in (0, 1):
            b = _scaled(mgr, proj, complex(g[i, j]))
            if i == j:
                b = add_edges(mgr, b, rest)
            blocks.append(b)
    e = mgr.make_matrix_node(target, blocks)
    ident = mgr.make_matrix_node(target, [ident, zero, zero, ident])
    for level in range(target + 1, n):
        if level in controls:
            e = mgr.make_matrix_node(level, [ident, zero, zero, e])
        else:
            e = mgr.make_matrix_node(level, [e, zero, zero, e])
        ident = mgr.make_matrix_node(level, [ident, zero, zero, ident])
    return OperatorDD(e, n, mgr)


def two_qubit_gate(n: int, qa: int, qb: int, g, mgr: Manager | None = None) -> OperatorDD:
    """Lift a 4x4 matrix whose more significant index bit belongs to ``qa``."""
    mgr = _mgr(mgr)
    if qa == qb:
        raise ValueError("two-qubit gate needs distinct qubits")
    g = np.asarray(g, dtype=complex)
    if g.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    total = ZERO_EDGE
    for i in (0, 1):
        for j in (0, 1):
            block = g[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            if not np.any(block):
                continue
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1
            term = product_operator(n, {qa: unit, qb: block}, mgr)
            total = add_edges(mgr, total, term.root)
    return OperatorDD(total, n, mgr)


def gate_operator(op: GateOp, n: int, mgr: Manager | None = None) -> OperatorDD:
    mgr = _mgr(mgr)
    m = gate_matrix(op.kind, op.params)
    if len(op.targets) == 2:
        return two_qubit_gate(n, op.targets[0], op.targets[1], m, mgr)
    return controlled_gate(n, op.controls, op.targets[0], m, mgr)


def kron(a: OperatorDD, b: OperatorDD) -> OperatorDD:
    """a (x) b with ``a`` on the more significant qubits."""
    if a.mgr is not b.mgr:
        raise ValueError("operands belong to different managers")
    root = kron_edges(a.mgr, a.root, b.root, b.num_qubits)
    return type(a)(root, a.num_qubits + b.num_qubits, a.mgr)


def mat_vec_mul(u: OperatorDD, v: StateDD) -> StateDD:
    _check_same(u, v)
    return StateDD(mat_vec_edges(u.mgr, u.root, v.root), v.num_qubits, v.mgr)


def mat_mat_mul(a: OperatorDD, b: OperatorDD) -> OperatorDD:
    _check_same(a, b)
    return OperatorDD(mat_mat_edges(a.mgr, a.root, b.root), a.num_qubits, a.mgr)


def add(a, b):
    """Elementwise sum; both operands must be of the same kind."""
    _check_same(a, b)
    if type(a) is not type(b):
        raise TypeError("cannot add a state to an operator")
    return type(a)(add_edges(a.mgr, a.root, b.root), a.num_qubits, a.mgr)


def conjugate_transpose(u: OperatorDD) -> OperatorDD:
    return OperatorDD(conj_transpose_edge(u.mgr, u.root), u.num_qubits, u.mgr)


def scale(u: OperatorDD, factor: complex) -> OperatorDD:
    return OperatorDD(_scaled(u.mgr, u.root, factor), u.num_qubits, u.mgr)


def get_entry(u: OperatorDD, row: int, col: int) -> complex:
    n = u.num_qubits
    if not (0 <= row < 1 << n and 0 <= col < 1 << n):
        raise ValueError(f"entry ({row}, {col}) out of range for {n} qubits")
    e = u.root
    val = e.w
    while e.node is not TERMINAL:
        if val == 0:
            return 0j
        v = e.node.v
        e = e.node.e[2 * ((row >> v) & 1) + ((col >> v) & 1)]
        val *= e.w
    return val


def to_matrix(u: OperatorDD, limit: int = 10) -> np.ndarray:
    n = u.num_qubits
    if n > limit:
        raise ValueError(f"dense read-back limited to {limit} qubits, got {n}")
    memo: dict[int, np.ndarray] = {}

    def mat(node) -> np.ndarray:
        if node is TERMINAL:
            return np.ones((1, 1), dtype=complex)
        got = memo.get(id(node))
        if got is not None:
            return got
        size = 1 << node.v
        blocks = [
            c.w * mat(c.node) if c.w != 0 else np.zeros((size, size), dtype=complex)
            for c in node.e
        ]
        out = np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]])
        memo[id(node)] = out
        return out

    if u.root.w == 0:
        return np.zeros((1 << n, 1 << n), dtype=complex)
    return u.root.w * mat(u.root.node)
