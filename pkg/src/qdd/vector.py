"""State-vector decision diagrams: construction, read-back and inner products."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TERMINAL, ZERO_EDGE, Edge, Manager, default_manager


@dataclass(frozen=True)
class StateDD:
    root: Edge
    num_qubits: int
    mgr: Manager

    def __repr__(self):
        return f"StateDD(n={self.num_qubits}, root_weight={self.root.w})"


def _mgr(mgr):
    return default_manager() if mgr is None else mgr


def _check_same(a, b):
    if a.mgr is not b.mgr:
        raise ValueError("operands belong to different managers")
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"qubit-count mismatch: {a.num_qubits} vs {b.num_qubits}"
        )


def from_amplitudes(amps, mgr: Manager | None = None) -> StateDD:
    """Build the DD of a dense amplitude vector; q_{n-1} splits the top half."""
    mgr = _mgr(mgr)
    amps = np.asarray(amps, dtype=complex).ravel()
    size = amps.size
    n = size.bit_length() - 1
    if size < 2 or 1 << n != size:
        raise ValueError(f"length {size} is not a power of two >= 2")
    vals = [complex(x) for x in amps]

    def build(level: int, lo: int) -> Edge:
        if level < 0:
            return mgr.edge(TERMINAL, vals[lo])
        half = 1 << level
        e0 = build(level - 1, lo)
        e1 = build(level - 1, lo + half)
        return mgr.make_vector_node(level, e0, e1)

    return StateDD(build(n - 1, 0), n, mgr)


def basis_state(n: int, i: int, mgr: Manager | None = None) -> StateDD:
    mgr = _mgr(mgr)
    if n < 1:
        raise ValueError("need at least one qubit")
    if not 0 <= i < 1 << n:
        raise ValueError(f"basis index {i} out of range for {n} qubits")
    e = Edge(TERMINAL, 1 + 0j)
    for level in range(n):
        if (i >> level) & 1:
            e = mgr.make_vector_node(level, ZERO_EDGE, e)
        else:
            e = mgr.make_vector_node(level, e, ZERO_EDGE)
    return StateDD(e, n, mgr)


def bitstring_state(bits: str, mgr: Manager | None = None) -> StateDD:
    """Basis state from an msb-first bitstring such as ``"110"``."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    return basis_state(len(bits), int(bits, 2), mgr)


def get_amplitude(s: StateDD, i: int) -> complex:
    n = s.num_qubits
    if not 0 <= i < 1 << n:
        raise ValueError(f"basis index {i} out of range for {n} qubits")
    e = s.root
    amp = e.w
    while e.node is not TERMINAL:
        if amp == 0:
            return 0j
        e = e.node.e[(i >> e.node.v) & 1]
        amp *= e.w
    return amp


def to_amplitudes(s: StateDD, limit: int | None = None) -> np.ndarray:
    n = s.num_qubits
    limit = s.mgr.dense_limit if limit is None else limit
    if n > limit:
        raise ValueError(f"dense read-back limited to {limit} qubits, got {n}")
    memo: dict[int, np.ndarray] = {}

    def vec(node) -> np.ndarray:
        if node is TERMINAL:
            return np.ones(1, dtype=complex)
        got = memo.get(id(node))
        if got is not None:
            return got
        size = 1 << node.v
        parts = []
        for c in node.e:
            if c.w == 0:
                parts.append(np.zeros(size, dtype=complex))
            else:
                parts.append(c.w * vec(c.node))
        out = np.concatenate(parts)
        memo[id(node)] = out
        return out

    if s.root.w == 0:
        return np.zeros(1 << n, dtype=complex)
    return s.root.w * vec(s.root.node)


def _ip_nodes(mgr: Manager, x, y, cache) -> complex:
    if x is TERMINAL:
        return 1 + 0j
    key = (x, y)
    r = cache.get(key)
    if r is not None:
        return r
    r = 0j
    for a, b in zip(x.e, y.e):
        if a.w != 0 and b.w != 0:
            r += a.w.conjugate() * b.w * _ip_nodes(mgr, a.node, b.node, cache)
    cache.put(key, r)
    return r


def inner_product(a: StateDD, b: StateDD) -> complex:
    """<a|b>, conjugating the first argument."""
    _check_same(a, b)
    if a.root.w == 0 or b.root.w == 0:
        return 0j
    cache = a.mgr.cache("inner")
    return a.root.w.conjugate() * b.root.w * _ip_nodes(a.mgr, a.root.node, b.root.node, cache)


def fidelity(a: StateDD, b: StateDD) -> float:
    return abs(inner_product(a, b)) ** 2


def norm_squared(s: StateDD) -> float:
    return inner_product(s, s).real


def scale(s: StateDD, factor: complex) -> StateDD:
    return StateDD(s.mgr.edge(s.root.node, s.root.w * factor), s.num_qubits, s.mgr)
