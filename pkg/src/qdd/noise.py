"""Noise-aware simulation: Kraus channels on density-matrix DDs, and Monte-Carlo
trajectories on state DDs."""
from __future__ import annotations

import bisect
import json
import math
import shlex
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .circuit import GateOp, MeasureOp, QuantumCircuit
from .core import TERMINAL, ZERO_EDGE, Edge, Manager, default_manager
from .matrix import (
    OperatorDD,
    add_edges,
    conj_transpose_edge,
    gate_operator,
    mat_mat_edges,
    mat_vec_edges,
    product_operator,
    two_qubit_gate,
)
from .simulator import (
    STREAM_MEASURE,
    STREAM_NOISE,
    GateCache,
    _Descent,
    chunks,
    stream_rng,
)
from .vector import StateDD, _ip_nodes, basis_state

COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    name: str
    operators: tuple
    p: float | None = None

    @property
    def arity(self) -> int:
        return 1 if self.operators[0].shape == (2, 2) else 2


@dataclass
class ChannelReport:
    ok: bool
    max_deviation: float
    position: tuple[int, int] | None = None
    message: str = ""


class ChannelError(ValueError):
    """A channel violates the Kraus completeness condition."""

    def __init__(self, report: ChannelReport, name: str = ""):
        super().__init__(f"channel {name!r}: {report.message}")
        self.report = report


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"error probability {p} outside [0, 1]")
    return p


def _channel(name, p, mats) -> KrausChannel:
    return KrausChannel(name, tuple(np.asarray(m, dtype=complex) for m in mats), p)


def amplitude_damping(p: float) -> KrausChannel:
    p = _check_p(p)
    return _channel(
        "amplitude_damping",
        p,
        [[[1, 0], [0, math.sqrt(1 - p)]], [[0, math.sqrt(p)], [0, 0]]],
    )


def depolarizing(p: float) -> KrausChannel:
    p = _check_p(p)
    a = math.sqrt(1 - 3 * p / 4)
    b = math.sqrt(p / 4)
    return _channel(
        "depolarizing",
        p,
        [
            [[a, 0], [0, a]],
            [[0, b], [b, 0]],
            [[0, -1j * b], [1j * b, 0]],
            [[b, 0], [0, -b]],
        ],
    )


def phase_flip(p: float) -> KrausChannel:
    p = _check_p(p)
    a = math.sqrt(1 - p)
    b = math.sqrt(p)
    return _channel("phase_flip", p, [[[a, 0], [0, a]], [[b, 0], [0, -b]]])


CHANNELS = {
    "amplitude_damping": amplitude_damping,
    "depolarizing": depolarizing,
    "phase_flip": phase_flip,
}


def validate_channel(c: KrausChannel) -> ChannelReport:
    """Check sum_i E_i^dagger E_i = I entrywise within 1e-10."""
    ops = c.operators
    if not ops:
        return ChannelReport(False, math.inf, None, "no Kraus operators")
    shape = ops[0].shape
    if shape not in ((2, 2), (4, 4)) or any(op.shape != shape for op in ops):
        return ChannelReport(False, math.inf, None, "operators must all be 2x2 or all 4x4")
    total = sum(op.conj().T @ op for op in ops)
    dev = np.abs(total - np.eye(shape[0]))
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    worst = float(dev[i, j])
    if worst <= COMPLETENESS_TOL:
        return ChannelReport(True, worst)
    return ChannelReport(
        False,
        worst,
        (int(i), int(j)),
        f"sum of E^dagger E deviates from identity by {worst:.6g} at ({i}, {j})",
    )


@dataclass(frozen=True)
class NoiseAttachment:
    """Apply ``channel`` after every gate whose name is in ``after`` (None: any
    gate), once on each touched qubit that is in ``qubits`` (None: all)."""

    channel: KrausChannel
    qubits: frozenset | None = None
    after: frozenset | None = None


@dataclass
class NoiseModel:
    attachments: list = field(default_factory=list)

    def add(self, channel: KrausChannel, qubits=None, after=None) -> "NoiseModel":
        self.attachments.append(
            NoiseAttachment(
                channel,
                None if qubits is None else frozenset(qubits),
                None if after is None else frozenset(after),
            )
        )
        return self

    def validate(self, num_qubits: int | None = None) -> None:
        for a in self.attachments:
            report = validate_channel(a.channel)
            if not report.ok:
                raise ChannelError(report, a.channel.name)
            if num_qubits is not None and a.qubits is not None:
                bad = [q for q in a.qubits if not 0 <= q < num_qubits]
                if bad:
                    raise ValueError(f"noise model references out-of-range qubits {bad}")

    def triggers(self, op: GateOp):
        """(targets, channel) pairs fired after ``op``."""
        out = []
        for a in self.attachments:
            if a.after is not None and op.name not in a.after:
                continue
            touched = [q for q in op.qubits if a.qubits is None or q in a.qubits]
            if a.channel.arity == 1:
                out.extend(((q,), a.channel) for q in touched)
            elif len(touched) == 2:
                out.append((tuple(touched), a.channel))
        return out


def parse_noise_model(text: str) -> NoiseModel:
    """Parse ``channel=<name> p=<float> on=<all|q,..> after=<all|gate,..>`` lines.

    ``channel=custom kraus=<json>`` supplies explicit operators as nested lists;
    a complex entry is written ``[re, im]``.  ``#`` starts a comment.
    """
    model = NoiseModel()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            fields = dict(tok.split("=", 1) for tok in shlex.split(line))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed entry ({exc})") from None
        unknown = set(fields) - {"channel", "p", "on", "after", "kraus"}
        if unknown:
            raise ValueError(f"line {lineno}: unknown keys {sorted(unknown)}")
        name = fields.get("channel")
        if name is None:
            raise ValueError(f"line {lineno}: missing channel=")
        try:
            if name == "custom":
                channel = KrausChannel(
                    "custom", tuple(_parse_matrix(m) for m in json.loads(fields["kraus"]))
                )
            elif name in CHANNELS:
                channel = CHANNELS[name](float(fields["p"]))
            else:
                raise ValueError(f"unknown channel {name!r}")
            on = fields.get("on", "all")
            qubits = None if on == "all" else [int(q) for q in on.split(",")]
            after = fields.get("after", "all")
            kinds = None if after == "all" else after.split(",")
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"line {lineno}: {exc!r}") from None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        model.add(channel, qubits, kinds)
    return model


def _parse_matrix(rows) -> np.ndarray:
    def entry(x):
        if isinstance(x, list):
            re, im = x
            return complex(re, im)
        return complex(x)

    m = np.array([[entry(x) for x in row] for row in rows], dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("Kraus operators must be square")
    return m


# -- density matrices ---------------------------------------------------------


@dataclass(frozen=True)
class DensityDD:
    root: Edge
    num_qubits: int
    mgr: Manager


def _outer_nodes(mgr: Manager, x, y) -> Edge:
    if x is TERMINAL:
        return Edge(TERMINAL, 1 + 0j)
    cache = mgr.cache("outer")
    key = (x, y)
    r = cache.get(key)
    if r is not None:
        return r
    children = []
    for a in x.e:
        for b in y.e:
            if a.w == 0 or b.w == 0:
                children.append(ZERO_EDGE)
            else:
                sub = _outer_nodes(mgr, a.node, b.node)
                children.append(mgr.edge(sub.node, sub.w * a.w * b.w.conjugate()))
    r = mgr.make_matrix_node(x.v, children)
    cache.put(key, r)
    return r


def density_from_state(v: StateDD) -> DensityDD:
    """rho = |v><v|."""
    if v.root.w == 0:
        raise ValueError("zero state has no density matrix")
    mgr = v.mgr
    r = _outer_nodes(mgr, v.root.node, v.root.node)
    root = mgr.edge(r.node, r.w * abs(v.root.w) ** 2)
    return DensityDD(root, v.num_qubits, mgr)


def _conjugate_by(mgr: Manager, u: Edge, rho: Edge) -> Edge:
    return mat_mat_edges(mgr, mat_mat_edges(mgr, u, rho), conj_transpose_edge(mgr, u))


def _lift(channel: KrausChannel, targets, n: int, mgr: Manager) -> list[Edge]:
    for q in targets:
        if not 0 <= q < n:
            raise ValueError(f"target qubit {q} out of range")
    if channel.arity == 1:
        if len(targets) != 1:
            raise ValueError("a 2x2 channel takes exactly one target")
        return [product_operator(n, {targets[0]: E}, mgr).root for E in channel.operators]
    if len(targets) != 2:
        raise ValueError("a 4x4 channel takes exactly two targets")
    return [two_qubit_gate(n, targets[0], targets[1], E, mgr).root for E in channel.operators]


def apply_channel(rho: DensityDD, c: KrausChannel, targets) -> DensityDD:
    """rho' = sum_i E_i rho E_i^dagger with each E_i lifted onto ``targets``."""
    report = validate_channel(c)
    if not report.ok:
        raise ChannelError(report, c.name)
    mgr = rho.mgr
    total = ZERO_EDGE
    for E in _lift(c, tuple(targets), rho.num_qubits, mgr):
        total = add_edges(mgr, total, _conjugate_by(mgr, E, rho.root))
    return DensityDD(total, rho.num_qubits, mgr)


def apply_gate_density(rho: DensityDD, u: OperatorDD) -> DensityDD:
    if u.mgr is not rho.mgr:
        raise ValueError("operands belong to different managers")
    if u.num_qubits != rho.num_qubits:
        raise ValueError(f"qubit-count mismatch: {u.num_qubits} vs {rho.num_qubits}")
    return DensityDD(_conjugate_by(rho.mgr, u.root, rho.root), rho.num_qubits, rho.mgr)


def diagonal_probabilities(rho: DensityDD) -> np.ndarray:
    """Real diagonal of rho, read along the (00, 11) successor paths only."""
    memo: dict = {}

    def diag(node) -> np.ndarray:
        if node is TERMINAL:
            return np.ones(1)
        got = memo.get(id(node))
        if got is not None:
            return got
        size = 1 << node.v
        parts = []
        for c in (node.e[0], node.e[3]):
            parts.append(np.zeros(size) if c.w == 0 else (c.w * diag(c.node)).real)
        out = np.concatenate(parts)
        memo[id(node)] = out
        return out

    n = rho.num_qubits
    if rho.root.w == 0:
        return np.zeros(1 << n)
    return (rho.root.w * diag(rho.root.node)).real


def trace(rho: DensityDD) -> float:
    return float(diagonal_probabilities(rho).sum())


def _pure_ops(c: QuantumCircuit):
    for op in c.ops:
        if isinstance(op, MeasureOp):
            raise ValueError("noise-aware simulation does not support measurements")
        if isinstance(op, GateOp):
            yield op


def deterministic_simulate(
    c: QuantumCircuit, model: NoiseModel, initial: StateDD | None = None, mgr: Manager | None = None
) -> DensityDD:
    """Exact density-matrix evolution: each gate, then the channels it triggers."""
    model.validate(c.num_qubits)
    mgr = mgr or (initial.mgr if initial is not None else default_manager())
    n = c.num_qubits
    if initial is None:
        initial = basis_state(n, 0, mgr)
    rho = density_from_state(initial)
    lifted: dict = {}
    for op in _pure_ops(c):
        rho = apply_gate_density(rho, gate_operator(op, n, mgr))
        for targets, channel in model.triggers(op):
            key = (targets, channel.name, id(channel))
            if key not in lifted:
                lifted[key] = _lift(channel, targets, n, mgr)
            total = ZERO_EDGE
            for E in lifted[key]:
                total = add_edges(mgr, total, _conjugate_by(mgr, E, rho.root))
            rho = DensityDD(total, n, mgr)
    return rho


def _trajectory_steps(c: QuantumCircuit, model: NoiseModel, mgr: Manager):
    n = c.num_qubits
    gates = GateCache(n, mgr)
    steps = []
    for op in _pure_ops(c):
        steps.append(("gate", gates(op)))
        for targets, channel in model.triggers(op):
            steps.append(("noise", _lift(channel, targets, n, mgr)))
    return steps


def _branches(mgr: Manager, kraus: list[Edge], state: Edge):
    """Cumulative probabilities ||E_i phi||^2 and the renormalized outcomes."""
    cum = []
    outs = []
    acc = 0.0
    cache = mgr.cache("inner")
    for E in kraus:
        phi = mat_vec_edges(mgr, E, state)
        if phi.w == 0:
            p = 0.0
        else:
            p = (abs(phi.w) ** 2 * _ip_nodes(mgr, phi.node, phi.node, cache)).real
        acc += p
        cum.append(acc)
        outs.append(mgr.edge(phi.node, phi.w / math.sqrt(p)) if p > 0 else ZERO_EDGE)
    return [x / acc for x in cum], outs


def _run_chunk(c, model, seed, chunk, size, initial_bits, mgr) -> Counter:
    n = c.num_qubits
    steps = _trajectory_steps(c, model, mgr)
    nnoise = sum(kind == "noise" for kind, _ in steps)
    start = basis_state(n, initial_bits, mgr).root
    u_meas = stream_rng(seed, chunk, STREAM_MEASURE).random((size, n))
    u_noise = stream_rng(seed, chunk, STREAM_NOISE).random((size, max(nnoise, 1)))
    descent = _Descent(mgr)
    memo: dict = {}
    counts: Counter = Counter()
    for shot in range(size):
        state = start
        j = 0
        for i, (kind, payload) in enumerate(steps):
            key = (i, state)
            got = memo.get(key)
            if kind == "gate":
                if got is None:
                    got = mat_vec_edges(mgr, payload, state)
                    memo[key] = got
                state = got
            else:
                if got is None:
                    got = _branches(mgr, payload, state)
                    memo[key] = got
                cum, outs = got
                k = bisect.bisect_right(cum, u_noise[shot, j])
                j += 1
                state = outs[min(k, len(outs) - 1)]
        counts[descent.sample(state, u_meas[shot])] += 1
    return counts


def _chunk_worker(args):
    c, model, seed, chunk, size, initial_bits, scheme = args
    return _run_chunk(c, model, seed, chunk, size, initial_bits, Manager(scheme=scheme))


def stochastic_simulate(
    c: QuantumCircuit,
    model: NoiseModel,
    shots: int,
    seed: int = 0,
    initial_bits: int = 0,
    mgr: Manager | None = None,
    workers: int = 1,
) -> dict[str, int]:
    """Monte-Carlo histogram: each shot samples one Kraus branch per trigger
    with probability ||E_i phi||^2, then measures every qubit.

    Shots are split into fixed-size chunks with their own random streams, so
    the histogram depends on ``seed`` only, not on ``workers``.  Measurement
    draws use the same streams as :func:`qdd.simulator.sample`.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    model.validate(c.num_qubits)
    mgr = mgr or default_manager()
    jobs = list(chunks(shots))
    counts: Counter = Counter()
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        args = [(c, model, seed, k, size, initial_bits, mgr.scheme) for k, size in jobs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_chunk_worker, args):
                counts.update(part)
    else:
        for k, size in jobs:
            counts.update(_run_chunk(c, model, seed, k, size, initial_bits, mgr))
    return dict(sorted(counts.items()))
