"""Circuit data model and the built-in gate matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SQ2 = 1 / math.sqrt(2)

FIXED_GATES = {
    "id": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, complex(SQ2, SQ2)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, complex(SQ2, -SQ2)]], dtype=complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}

PARAM_GATES = {"rx": 1, "ry": 1, "rz": 1, "p": 1}

TWO_QUBIT = {"swap"}

# kinds whose inverse is obtained by negating every angle
_NEGATE = {"rx", "ry", "rz", "p"}
_DAGGER = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}


def gate_matrix(kind: str, params=()) -> np.ndarray:
    if kind in FIXED_GATES:
        if params:
            raise ValueError(f"gate {kind!r} takes no parameters")
        return FIXED_GATES[kind]
    if kind not in PARAM_GATES:
        raise ValueError(f"unsupported gate {kind!r}")
    if len(params) != PARAM_GATES[kind]:
        raise ValueError(f"gate {kind!r} takes {PARAM_GATES[kind]} parameter(s)")
    (theta,) = params
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rz":
        return np.array(
            [[complex(c, -s), 0], [0, complex(c, s)]], dtype=complex
        )
    return np.array([[1, 0], [0, complex(math.cos(theta), math.sin(theta))]], dtype=complex)


def inverse_kind(kind: str, params=()) -> tuple[str, tuple]:
    if kind in _DAGGER:
        return _DAGGER[kind], ()
    if kind in _NEGATE:
        return kind, tuple(-p for p in params)
    if kind in FIXED_GATES:
        return kind, ()
    raise ValueError(f"cannot invert unsupported gate {kind!r}")


@dataclass(frozen=True)
class GateOp:
    """A (multi-)controlled gate.  ``targets`` has one entry, two for swap."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[float, ...] = ()

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def name(self) -> str:
        """OpenQASM-style name, e.g. ``cx`` for a singly controlled ``x``."""
        nc = len(self.controls)
        if nc == 0:
            return self.kind
        if nc == 1 and self.kind in ("x", "z", "p"):
            return "c" + self.kind
        if nc == 2 and self.kind == "x":
            return "ccx"
        return "c" * nc + self.kind


@dataclass(frozen=True)
class Barrier:
    qubits: tuple[int, ...] = ()


@dataclass(frozen=True)
class MeasureOp:
    qubit: int
    clbit: int


@dataclass
class QuantumCircuit:
    num_qubits: int
    ops: list = field(default_factory=list)
    num_clbits: int = 0

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        ops, self.ops = self.ops, []
        for op in ops:
            self.append(op)

    def append(self, op) -> "QuantumCircuit":
        n = self.num_qubits
        if isinstance(op, GateOp):
            q = op.qubits
            if any(not 0 <= k < n for k in q):
                raise ValueError(f"qubit index out of range in {op}")
            if len(set(q)) != len(q):
                raise ValueError(f"targets overlap controls in {op}")
            want = 2 if op.kind in TWO_QUBIT else 1
            if len(op.targets) != want:
                raise ValueError(f"gate {op.kind!r} needs {want} target(s)")
            if want == 2 and op.controls:
                raise ValueError("controlled two-qubit gates are not supported")
            gate_matrix(op.kind, op.params)
        elif isinstance(op, Barrier):
            if any(not 0 <= k < n for k in op.qubits):
                raise ValueError("barrier qubit out of range")
        elif isinstance(op, MeasureOp):
            if not 0 <= op.qubit < n:
                raise ValueError("measured qubit out of range")
            if op.clbit < 0:
                raise ValueError("negative classical bit")
            self.num_clbits = max(self.num_clbits, op.clbit + 1)
        else:
            raise TypeError(f"not a circuit operation: {op!r}")
        self.ops.append(op)
        return self

    # chainable builders ---------------------------------------------------

    def gate(self, kind, *targets, controls=(), params=()):
        return self.append(GateOp(kind, tuple(targets), tuple(controls), tuple(params)))

    def h(self, q):
        return self.gate("h", q)

    def x(self, q):
        return self.gate("x", q)

    def y(self, q):
        return self.gate("y", q)

    def z(self, q):
        return self.gate("z", q)

    def s(self, q):
        return self.gate("s", q)

    def t(self, q):
        return self.gate("t", q)

    def rx(self, theta, q):
        return self.gate("rx", q, params=(theta,))

    def ry(self, theta, q):
        return self.gate("ry", q, params=(theta,))

    def rz(self, theta, q):
        return self.gate("rz", q, params=(theta,))

    def p(self, theta, q):
        return self.gate("p", q, params=(theta,))

    def cx(self, c, t):
        return self.gate("x", t, controls=(c,))

    def cz(self, c, t):
        return self.gate("z", t, controls=(c,))

    def cp(self, theta, c, t):
        return self.gate("p", t, controls=(c,), params=(theta,))

    def ccx(self, c1, c2, t):
        return self.gate("x", t, controls=(c1, c2))

    def swap(self, a, b):
        return self.gate("swap", a, b)

    def barrier(self, *qubits):
        return self.append(Barrier(tuple(qubits) or tuple(range(self.num_qubits))))

    def measure(self, q, c):
        return self.append(MeasureOp(q, c))

    # views ------------------------------------------------------------------

    @property
    def gates(self) -> list[GateOp]:
        return [op for op in self.ops if isinstance(op, GateOp)]

    def has_measurements(self) -> bool:
        return any(isinstance(op, MeasureOp) for op in self.ops)

    def copy(self) -> "QuantumCircuit":
        return QuantumCircuit(self.num_qubits, list(self.ops), self.num_clbits)

    def without_final_measurements(self) -> "QuantumCircuit":
        """Drop measurements that are only followed by measurements/barriers."""
        ops = list(self.ops)
        cut = len(ops)
        while cut and isinstance(ops[cut - 1], (MeasureOp, Barrier)):
            cut -= 1
        if any(isinstance(op, MeasureOp) for op in ops[:cut]):
            raise ValueError("circuit contains mid-circuit measurements")
        kept = ops[:cut] + [op for op in ops[cut:] if isinstance(op, Barrier)]
        return QuantumCircuit(self.num_qubits, kept, self.num_clbits)
