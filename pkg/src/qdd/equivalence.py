"""Equivalence checking of circuits: by construction, by the alternating
G -> I <- G' scheme, and by simulation with random basis-state stimuli."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Barrier, GateOp, QuantumCircuit, inverse_kind
from .core import TERMINAL, Edge, Manager, default_manager, node_count
from .matrix import (
    OperatorDD,
    conj_transpose_edge,
    gate_operator,
    identity,
    mat_mat_edges,
)
from .simulator import simulate
from .vector import basis_state, fidelity

ROOT_TOLERANCE = 1e-10


class Verdict(str, enum.Enum):
    EQUIVALENT = "equivalent"
    EQUIVALENT_UP_TO_PHASE = "equivalent-up-to-global-phase"
    NON_EQUIVALENT = "non-equivalent"
    PROBABLY_EQUIVALENT = "probably-equivalent"

    @property
    def passed(self) -> bool:
        return self is not Verdict.NON_EQUIVALENT


class Strategy(str, enum.Enum):
    NAIVE = "naive"
    ONE_TO_ONE = "one-to-one"
    PROPORTIONAL = "proportional"
    BARRIER_GUIDED = "barrier-guided"


@dataclass
class EquivalenceResult:
    verdict: Verdict
    global_phase: float | None = None
    counterexample: tuple[int, float] | None = None
    stats: dict = field(default_factory=dict)

    @property
    def equivalent(self) -> bool:
        return self.verdict.passed


def invert_gate(g: GateOp) -> GateOp:
    kind, params = inverse_kind(g.kind, g.params)
    return GateOp(kind, g.targets, g.controls, params)


def _gate_ops(c: QuantumCircuit) -> list[GateOp]:
    if c.has_measurements():
        raise ValueError("circuit contains measurements")
    return c.gates


def _check_pair(g: QuantumCircuit, g2: QuantumCircuit):
    if g.num_qubits != g2.num_qubits:
        raise ValueError(f"qubit-count mismatch: {g.num_qubits} vs {g2.num_qubits}")


def system_matrix(c: QuantumCircuit, mgr: Manager | None = None) -> OperatorDD:
    """U = U_{m-1} ... U_1 U_0, accumulated gate by gate."""
    mgr = mgr or default_manager()
    n = c.num_qubits
    acc = identity(n, mgr).root
    for op in _gate_ops(c):
        acc = mat_mat_edges(mgr, gate_operator(op, n, mgr).root, acc)
    return OperatorDD(acc, n, mgr)


def import_edge(e: Edge, mgr: Manager) -> Edge:
    """Rebuild a DD owned by another manager inside ``mgr``."""
    memo: dict = {}

    def walk(node) -> Edge:
        if node is TERMINAL:
            return Edge(TERMINAL, 1 + 0j)
        got = memo.get(id(node))
        if got is not None:
            return got
        kids = []
        for c in node.e:
            if c.w == 0:
                kids.append(mgr.edge(TERMINAL, 0j))
            else:
                sub = walk(c.node)
                kids.append(mgr.edge(sub.node, sub.w * c.w))
        if len(kids) == 2:
            r = mgr.make_vector_node(node.v, kids[0], kids[1])
        else:
            r = mgr.make_matrix_node(node.v, kids)
        memo[id(node)] = r
        return r

    if e.w == 0:
        return mgr.edge(TERMINAL, 0j)
    r = walk(e.node)
    return mgr.edge(r.node, r.w * e.w)


def _compare_edges(a: Edge, b: Edge, tol: float):
    if a.node is not b.node:
        return Verdict.NON_EQUIVALENT, None
    if a.w == 0 or b.w == 0:
        if a.w == b.w:
            return Verdict.EQUIVALENT, 0.0
        return Verdict.NON_EQUIVALENT, None
    if abs(abs(a.w) - abs(b.w)) > tol:
        return Verdict.NON_EQUIVALENT, None
    ratio = b.w / a.w
    if abs(ratio - 1) <= tol:
        return Verdict.EQUIVALENT, 0.0
    return Verdict.EQUIVALENT_UP_TO_PHASE, cmath.phase(ratio) % (2 * math.pi)


def phase_equivalent(u: OperatorDD, v: OperatorDD, tol: float = ROOT_TOLERANCE):
    """(verdict, alpha) with ``v = e^{i alpha} u`` when the DDs share structure."""
    if u.num_qubits != v.num_qubits:
        raise ValueError(f"qubit-count mismatch: {u.num_qubits} vs {v.num_qubits}")
    vroot = v.root if v.mgr is u.mgr else import_edge(v.root, u.mgr)
    return _compare_edges(u.root, vroot, tol)


def _schedule(strategy: Strategy, g: QuantumCircuit, g2: QuantumCircuit):
    """Effective strategy and the batches (left gates, right gates) to apply."""
    left = _gate_ops(g)
    m = len(left)
    if strategy == Strategy.BARRIER_GUIDED:
        if not any(isinstance(op, Barrier) for op in g2.ops):
            strategy = Strategy.PROPORTIONAL
        else:
            _gate_ops(g2)
            segments = [[]]
            for op in g2.ops:
                if isinstance(op, Barrier):
                    if segments[-1]:
                        segments.append([])
                else:
                    segments[-1].append(op)
            segments = [s for s in segments if s]
            out = []
            for i in range(max(m, len(segments))):
                out.append(
                    (left[i : i + 1], segments[i] if i < len(segments) else [])
                )
            return strategy, out
    right = _gate_ops(g2)
    k = len(right)
    if strategy == Strategy.NAIVE:
        return strategy, [(left, []), ([], right)]
    if strategy == Strategy.ONE_TO_ONE:
        per = 1
    elif strategy == Strategy.PROPORTIONAL:
        per = max(1, math.ceil(k / m)) if m else k
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    out = []
    j = 0
    for op in left:
        out.append(([op], right[j : j + per]))
        j += per
    if j < k:
        out.append(([], right[j:]))
    return strategy, out


def check_alternating(
    g: QuantumCircuit,
    g2: QuantumCircuit,
    strategy: Strategy | str = Strategy.PROPORTIONAL,
    mgr: Manager | None = None,
    tol: float = ROOT_TOLERANCE,
) -> EquivalenceResult:
    """Start from the identity, multiply gates of ``g`` from the left and
    inverted gates of ``g2`` from the right; equivalent circuits end at the
    identity (up to a global phase)."""
    _check_pair(g, g2)
    strategy = Strategy(strategy)
    mgr = mgr or default_manager()
    n = g.num_qubits
    cur = identity(n, mgr).root
    mgr.retain(cur)
    peak = node_count(cur)
    applied_left = applied_right = 0
    strategy, batches = _schedule(strategy, g, g2)
    for lefts, rights in batches:
        for op in lefts:
            nxt = mat_mat_edges(mgr, gate_operator(op, n, mgr).root, cur)
            mgr.retain(nxt)
            mgr.release(cur)
            cur = nxt
            applied_left += 1
            peak = max(peak, node_count(cur))
        for op in rights:
            inv = gate_operator(invert_gate(op), n, mgr).root
            nxt = mat_mat_edges(mgr, cur, inv)
            mgr.retain(nxt)
            mgr.release(cur)
            cur = nxt
            applied_right += 1
            peak = max(peak, node_count(cur))
        if mgr.live_nodes() > mgr.gc_threshold:
            mgr.collect_garbage()
    ident = identity(n, mgr).root
    verdict, alpha = _compare_edges(ident, cur, tol)
    stats = {
        "strategy": strategy.value,
        "peak_nodes": peak,
        "final_nodes": node_count(cur),
        "applied_left": applied_left,
        "applied_right": applied_right,
    }
    mgr.release(cur)
    return EquivalenceResult(
        verdict, alpha if verdict == Verdict.EQUIVALENT_UP_TO_PHASE else None, None, stats
    )


def check_construction(
    g: QuantumCircuit, g2: QuantumCircuit, mgr: Manager | None = None, tol: float = ROOT_TOLERANCE
) -> EquivalenceResult:
    """Build both system matrices and compare them up to a global phase."""
    _check_pair(g, g2)
    mgr = mgr or default_manager()
    u = system_matrix(g, mgr)
    mgr.retain(u.root)
    v = system_matrix(g2, mgr)
    mgr.release(u.root)
    verdict, alpha = phase_equivalent(u, v, tol)
    stats = {
        "nodes_g": node_count(u.root),
        "nodes_g2": node_count(v.root),
        "peak_nodes": max(node_count(u.root), node_count(v.root)),
        "applied_left": len(g.gates),
        "applied_right": len(g2.gates),
    }
    return EquivalenceResult(
        verdict, alpha if verdict == Verdict.EQUIVALENT_UP_TO_PHASE else None, None, stats
    )


def choose_stimuli(n: int, k: int, rng: np.random.Generator) -> list[int]:
    """``k`` distinct basis indices out of ``2**n``."""
    size = 1 << n
    if not 1 <= k <= size:
        raise ValueError(f"number of stimuli must lie in [1, {size}]")
    if n <= 16:
        return [int(i) for i in rng.permutation(size)[:k]]
    seen: dict = {}
    while len(seen) < k:
        seen.setdefault(int(rng.integers(0, size)), None)
    return list(seen)


def check_simulation(
    g: QuantumCircuit,
    g2: QuantumCircuit,
    num_stimuli: int = 1,
    seed: int = 0,
    epsilon: float = 1e-10,
    mgr: Manager | None = None,
) -> EquivalenceResult:
    """Simulate both circuits on random distinct basis states and compare the
    outputs by fidelity; the first stimulus with F < 1 - epsilon is returned as
    a counterexample."""
    _check_pair(g, g2)
    mgr = mgr or default_manager()
    n = g.num_qubits
    _gate_ops(g)
    _gate_ops(g2)
    stimuli = choose_stimuli(n, num_stimuli, np.random.default_rng(seed))
    worst = 1.0
    for count, i in enumerate(stimuli, 1):
        start = basis_state(n, i, mgr)
        f = fidelity(simulate(g, start), simulate(g2, start))
        worst = min(worst, f)
        if f < 1 - epsilon:
            return EquivalenceResult(
                Verdict.NON_EQUIVALENT,
                None,
                (i, f),
                {"stimuli_run": count, "stimuli_passed": count - 1, "min_fidelity": f},
            )
    return EquivalenceResult(
        Verdict.PROBABLY_EQUIVALENT,
        None,
        None,
        {"stimuli_run": len(stimuli), "stimuli_passed": len(stimuli), "min_fidelity": worst},
    )


def difference_matrix(g: QuantumCircuit, g2: QuantumCircuit, mgr: Manager | None = None) -> OperatorDD:
    """D = U^dagger U', so that U D = U'."""
    _check_pair(g, g2)
    mgr = mgr or default_manager()
    u = system_matrix(g, mgr)
    mgr.retain(u.root)
    v = system_matrix(g2, mgr)
    d = mat_mat_edges(mgr, conj_transpose_edge(mgr, u.root), v.root)
    mgr.release(u.root)
    return OperatorDD(d, g.num_qubits, mgr)
