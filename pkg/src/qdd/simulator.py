"""Gate-by-gate simulation and measurement on state decision diagrams."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .circuit import Barrier, GateOp, MeasureOp, QuantumCircuit
from .core import TERMINAL, ZERO_EDGE, Edge, Manager, default_manager
from .matrix import M0, M1, gate_operator, mat_vec_edges, single_qubit_gate
from .vector import StateDD, basis_state

RNG_ALGORITHM = "numpy.PCG64 via SeedSequence(seed, spawn_key=(chunk, stream))"
CHUNK_SHOTS = 1 << 14
STREAM_MEASURE = 0
STREAM_NOISE = 1


def stream_rng(seed: int, chunk: int, stream: int) -> np.random.Generator:
    """Independent generator for one shot chunk and one purpose."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(chunk, stream))
    return np.random.Generator(np.random.PCG64(ss))


def chunks(shots: int):
    for k, start in enumerate(range(0, shots, CHUNK_SHOTS)):
        yield k, min(CHUNK_SHOTS, shots - start)


@dataclass
class MeasurementRecord:
    outcomes: str = ""
    probabilities: list = field(default_factory=list)


class GateCache:
    """Per-run memo of gate operators keyed by the op itself."""

    def __init__(self, n: int, mgr: Manager):
        self.n = n
        self.mgr = mgr
        self._ops: dict = {}

    def __call__(self, op: GateOp) -> Edge:
        e = self._ops.get(op)
        if e is None:
            e = gate_operator(op, self.n, self.mgr).root
            self._ops[op] = e
        return e

    def clear(self):
        self._ops.clear()


def simulate(c: QuantumCircuit, initial: StateDD | None = None, mgr: Manager | None = None) -> StateDD:
    """Apply every gate of ``c`` in order; measurements are rejected."""
    if initial is None:
        initial = basis_state(c.num_qubits, 0, mgr or default_manager())
    if initial.num_qubits != c.num_qubits:
        raise ValueError(
            f"qubit-count mismatch: circuit {c.num_qubits}, state {initial.num_qubits}"
        )
    mgr = initial.mgr
    gates = GateCache(c.num_qubits, mgr)
    state = initial.root
    mgr.retain(initial.root)
    mgr.retain(state)
    for op in c.ops:
        if isinstance(op, Barrier):
            continue
        if isinstance(op, MeasureOp):
            mgr.release(state)
            mgr.release(initial.root)
            raise ValueError("simulate() does not accept measurements; use sample()")
        nxt = mat_vec_edges(mgr, gates(op), state)
        mgr.retain(nxt)
        mgr.release(state)
        state = nxt
        if mgr.live_nodes() > mgr.gc_threshold:
            gates.clear()
            mgr.collect_garbage()
    mgr.release(state)
    mgr.release(initial.root)
    return StateDD(state, c.num_qubits, mgr)


def _node_norms(mgr: Manager, node, memo: dict) -> float:
    """Squared norm of the sub-vector below ``node`` reached with unit weight."""
    if node is TERMINAL:
        return 1.0
    got = memo.get(id(node))
    if got is not None:
        return got
    total = 0.0
    for c in node.e:
        if c.w != 0:
            total += (c.w.real ** 2 + c.w.imag ** 2) * _node_norms(mgr, c.node, memo)
    memo[id(node)] = total
    return total


def _level_masses(s: StateDD, q: int):
    """Absolute probability mass (p0, p1) of qubit ``q`` by top-down accumulation."""
    root = s.root
    if root.w == 0:
        raise ValueError("zero-norm state")
    norms: dict = {}
    frontier = {id(root.node): (root.node, abs(root.w) ** 2)}
    level = s.num_qubits - 1
    while level > q:
        nxt: dict = {}
        for node, mass in frontier.values():
            for c in node.e:
                if c.w == 0:
                    continue
                m = mass * (c.w.real ** 2 + c.w.imag ** 2)
                k = id(c.node)
                if k in nxt:
                    nxt[k] = (c.node, nxt[k][1] + m)
                else:
                    nxt[k] = (c.node, m)
        frontier = nxt
        level -= 1
    p = [0.0, 0.0]
    for node, mass in frontier.values():
        for b, c in enumerate(node.e):
            if c.w != 0:
                p[b] += mass * (c.w.real ** 2 + c.w.imag ** 2) * _node_norms(s.mgr, c.node, norms)
    return p[0], p[1]


def qubit_probabilities(s: StateDD, q: int) -> tuple[float, float]:
    if not 0 <= q < s.num_qubits:
        raise ValueError(f"qubit {q} out of range")
    p0, p1 = _level_masses(s, q)
    total = p0 + p1
    if total <= 0:
        raise ValueError("zero-norm state")
    return p0 / total, p1 / total


def measure_qubit(s: StateDD, q: int, rng=None, outcome: int | None = None):
    """Sample (or force) the outcome of qubit ``q`` and collapse the state.

    Returns ``(outcome, collapsed_state, probability_of_outcome)``.
    """
    if not 0 <= q < s.num_qubits:
        raise ValueError(f"qubit {q} out of range")
    p0, p1 = _level_masses(s, q)
    total = p0 + p1
    if total <= 0:
        raise ValueError("zero-norm state")
    if outcome is None:
        if rng is None:
            raise ValueError("need an rng or a forced outcome")
        outcome = 0 if rng.random() < p0 / total else 1
    mass = p1 if outcome else p0
    if mass <= 0:
        raise ValueError(f"outcome {outcome} has probability zero")
    proj = single_qubit_gate(s.num_qubits, q, M1 if outcome else M0, s.mgr)
    mgr = s.mgr
    e = mat_vec_edges(mgr, proj.root, s.root)
    e = mgr.edge(e.node, e.w / math.sqrt(mass))
    return outcome, StateDD(e, s.num_qubits, mgr), mass / total


class _Descent:
    """Branch probabilities for sampling all qubits msb-first by walking down."""

    def __init__(self, mgr: Manager):
        self.mgr = mgr
        self._norms: dict = {}
        self._p0: dict = {}

    def p0(self, node) -> float:
        k = id(node)
        got = self._p0.get(k)
        if got is None:
            e0 = node.e[0]
            a = 0.0
            if e0.w != 0:
                a = abs(e0.w) ** 2 * _node_norms(self.mgr, e0.node, self._norms)
            total = _node_norms(self.mgr, node, self._norms)
            got = a / total
            self._p0[k] = got
        return got

    def sample(self, root: Edge, uniforms) -> str:
        if root.w == 0:
            raise ValueError("zero-norm state")
        bits = []
        node = root.node
        for u in uniforms:
            b = 0 if u < self.p0(node) else 1
            bits.append("01"[b])
            node = node.e[b].node
        return "".join(bits)

    def sample_record(self, root: Edge, uniforms) -> MeasurementRecord:
        rec = MeasurementRecord()
        node = root.node
        for u in uniforms:
            p0 = self.p0(node)
            b = 0 if u < p0 else 1
            rec.outcomes += "01"[b]
            rec.probabilities.append(p0 if b == 0 else 1.0 - p0)
            node = node.e[b].node
        return rec


def measure_all(s: StateDD, rng, record: bool = False):
    """Measure q_{n-1}, ..., q_0 in turn; returns an msb-first bitstring.

    After the top qubit collapses, the only node left on the next level is the
    chosen successor, so sequential collapse reduces to one root-to-terminal
    walk.  One uniform is consumed per qubit.
    """
    d = _Descent(s.mgr)
    u = rng.random(s.num_qubits)
    if record:
        return d.sample_record(s.root, u)
    return d.sample(s.root, u)


def _histogram(counter: Counter) -> dict[str, int]:
    return dict(sorted(counter.items()))


def sample(
    c: QuantumCircuit,
    shots: int,
    seed: int = 0,
    initial: StateDD | None = None,
    mgr: Manager | None = None,
) -> dict[str, int]:
    """Histogram of ``shots`` runs, keyed msb-first.

    Without measurement ops the final state is computed once and every shot
    measures all qubits.  With measurement ops each shot re-runs the circuit,
    collapsing at every ``MeasureOp``; keys are then classical registers.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    mgr = mgr or (initial.mgr if initial is not None else default_manager())
    n = c.num_qubits
    if initial is None:
        initial = basis_state(n, 0, mgr)
    counts: Counter = Counter()
    if not c.has_measurements():
        final = simulate(c, initial)
        d = _Descent(mgr)
        for k, size in chunks(shots):
            u = stream_rng(seed, k, STREAM_MEASURE).random((size, n))
            for row in u:
                counts[d.sample(final.root, row)] += 1
        return _histogram(counts)

    gates = GateCache(n, mgr)
    nmeas = sum(isinstance(op, MeasureOp) for op in c.ops)
    memo: dict = {}
    for k, size in chunks(shots):
        u = stream_rng(seed, k, STREAM_MEASURE).random((size, max(nmeas, 1)))
        for row in u:
            state = initial.root
            clbits = [0] * c.num_clbits
            j = 0
            for i, op in enumerate(c.ops):
                if isinstance(op, Barrier):
                    continue
                key = (i, state)
                if isinstance(op, GateOp):
                    nxt = memo.get(key)
                    if nxt is None:
                        nxt = mat_vec_edges(mgr, gates(op), state)
                        memo[key] = nxt
                    state = nxt
                    continue
                branch = memo.get(key)
                if branch is None:
                    s = StateDD(state, n, mgr)
                    p0, _ = qubit_probabilities(s, op.qubit)
                    outs = []
                    for b in (0, 1):
                        pb = p0 if b == 0 else 1.0 - p0
                        outs.append(measure_qubit(s, op.qubit, outcome=b)[1].root if pb > 0 else ZERO_EDGE)
                    branch = (p0, outs)
                    memo[key] = branch
                b = 0 if row[j] < branch[0] else 1
                j += 1
                clbits[op.clbit] = b
                state = branch[1][b]
            counts["".join(str(x) for x in reversed(clbits))] += 1
    return _histogram(counts)
