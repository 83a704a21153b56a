"""OpenQASM 2 subset: parsing into QuantumCircuit and serialization back."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import Barrier, GateOp, MeasureOp, QuantumCircuit
from .equivalence import invert_gate

# name -> (kind, number of controls, number of params, number of qubit args)
GATES = {
    "id": ("id", 0, 0, 1),
    "x": ("x", 0, 0, 1),
    "y": ("y", 0, 0, 1),
    "z": ("z", 0, 0, 1),
    "h": ("h", 0, 0, 1),
    "s": ("s", 0, 0, 1),
    "sdg": ("sdg", 0, 0, 1),
    "t": ("t", 0, 0, 1),
    "tdg": ("tdg", 0, 0, 1),
    "rx": ("rx", 0, 1, 1),
    "ry": ("ry", 0, 1, 1),
    "rz": ("rz", 0, 1, 1),
    "u1": ("p", 0, 1, 1),
    "p": ("p", 0, 1, 1),
    "cx": ("x", 1, 0, 2),
    "cz": ("z", 1, 0, 2),
    "cp": ("p", 1, 1, 2),
    "cu1": ("p", 1, 1, 2),
    "swap": ("swap", 0, 0, 2),
    "ccx": ("x", 2, 0, 3),
}


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # id, num, str, sym, eof
    text: str
    line: int
    column: int


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[\[\](),;+\-*/^{}=<>])
    """,
    re.VERBOSE,
)


def tokenize(src: str) -> list[Token]:
    out = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError([ParseDiagnostic(line, col, f"unexpected character {src[pos]!r}")])
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "arrow":
            out.append(Token("sym", text, line, col))
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, text, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0
        self.qreg = None  # (name, size)
        self.creg = None
        self.ops = []

    # helpers ---------------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError([ParseDiagnostic(tok.line, tok.column, msg)])

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text) -> Token:
        if self.tok.text != text or self.tok.kind == "str":
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "id":
            self.fail(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def integer(self) -> tuple[int, Token]:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.fail(f"expected integer, found {t.text or 'end of input'!r}")
        self.advance()
        return int(t.text), t

    # grammar -----------------------------------------------------------------

    def program(self):
        if self.tok.kind == "id" and self.tok.text == "OPENQASM":
            self.advance()
            t = self.tok
            if t.kind != "num":
                self.fail("expected version number")
            if t.text not in ("2", "2.0"):
                self.fail(f"unsupported OpenQASM version {t.text}", t)
            self.advance()
            self.expect(";")
        while self.tok.kind != "eof":
            self.statement()

    def statement(self):
        t = self.ident()
        name = t.text
        if name == "include":
            if self.tok.kind != "str":
                self.fail("expected file name string")
            self.advance()
            self.expect(";")
        elif name in ("qreg", "creg"):
            self.declaration(name, t)
        elif name == "barrier":
            qubits = []
            for q in self.qargs():
                qubits.extend(q)
            self.expect(";")
            self.ops.append(Barrier(tuple(dict.fromkeys(qubits))))
        elif name == "measure":
            self.measure(t)
        elif name in GATES:
            self.gate(name, t)
        elif name in ("gate", "opaque", "if", "reset", "U", "CX"):
            self.fail(f"unsupported statement {name!r}", t)
        else:
            self.fail(f"unknown gate {name!r}", t)

    def declaration(self, kind, t):
        reg = self.ident()
        self.expect("[")
        size, st = self.integer()
        self.expect("]")
        self.expect(";")
        if size < 1:
            self.fail("register size must be positive", st)
        if kind == "qreg":
            if self.qreg is not None:
                self.fail("only a single quantum register is supported", t)
            if size > 64:
                self.fail("register too large (max 64 qubits)", st)
            self.qreg = (reg.text, size)
        else:
            if self.creg is not None:
                self.fail("only a single classical register is supported", t)
            if size > 1024:
                self.fail("register too large (max 1024 bits)", st)
            self.creg = (reg.text, size)

    def register_ref(self, reg, what):
        """Return list of indices; ``reg`` is (name, size)."""
        t = self.ident()
        if reg is None:
            self.fail(f"no {what} register declared", t)
        if t.text != reg[0]:
            self.fail(f"unknown register {t.text!r}", t)
        if self.tok.text == "[":
            self.advance()
            k, kt = self.integer()
            self.expect("]")
            if k >= reg[1]:
                label = "qubit" if what == "quantum" else "classical bit"
                self.fail(f"{label} index out of range", kt)
            return [k]
        return list(range(reg[1]))

    def qargs(self):
        out = [self.register_ref(self.qreg, "quantum")]
        while self.tok.text == ",":
            self.advance()
            out.append(self.register_ref(self.qreg, "quantum"))
        return out

    def measure(self, t):
        qs = self.register_ref(self.qreg, "quantum")
        self.expect("->")
        cs = self.register_ref(self.creg, "classical")
        self.expect(";")
        if len(qs) != len(cs):
            self.fail("measure operands have different sizes", t)
        for q, c in zip(qs, cs):
            self.ops.append(MeasureOp(q, c))

    def gate(self, name, t):
        kind, nc, npar, nargs = GATES[name]
        params = []
        if self.tok.text == "(":
            self.advance()
            if self.tok.text != ")":
                params.append(self.expr())
                while self.tok.text == ",":
                    self.advance()
                    params.append(self.expr())
            self.expect(")")
        if not all(math.isfinite(a) for a in params):
            self.fail("angle expression overflows", t)
        if len(params) != npar:
            self.fail(f"gate {name!r} takes {npar} parameter(s), got {len(params)}", t)
        args_start = self.tok
        args = self.qargs()
        self.expect(";")
        if len(args) != nargs:
            self.fail(f"gate {name!r} takes {nargs} qubit argument(s), got {len(args)}", args_start)
        sizes = {len(a) for a in args if len(a) > 1}
        if len(sizes) > 1:
            self.fail("register arguments of different sizes", args_start)
        width = sizes.pop() if sizes else 1
        for k in range(width):
            qs = [a[k] if len(a) > 1 else a[0] for a in args]
            if len(set(qs)) != len(qs):
                self.fail("repeated qubit in gate arguments", args_start)
            if kind == "swap":
                op = GateOp("swap", tuple(qs), (), ())
            else:
                op = GateOp(kind, (qs[-1],), tuple(qs[:-1]), tuple(params))
            self.ops.append(op)

    # angle expressions -------------------------------------------------------

    def expr(self) -> float:
        v = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            r = self.term()
            v = v + r if op == "+" else v - r
        return v

    def term(self) -> float:
        v = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance()
            r = self.unary()
            if op.text == "*":
                v = v * r
            else:
                if r == 0:
                    self.fail("division by zero", op)
                v = v / r
        return v

    def unary(self) -> float:
        if self.tok.text == "-":
            self.advance()
            return -self.unary()
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.atom()

    def atom(self) -> float:
        t = self.tok
        if t.kind == "num":
            self.advance()
            v = float(t.text)
            if not math.isfinite(v):
                self.fail("numeric literal out of range", t)
            return v
        if t.kind == "id" and t.text == "pi":
            self.advance()
            return math.pi
        if t.text == "(":
            self.advance()
            v = self.expr()
            self.expect(")")
            return v
        self.fail(f"expected angle expression, found {t.text or 'end of input'!r}")


def parse(source) -> QuantumCircuit:
    """Parse a program; any problem raises :class:`ParseError`."""
    try:
        if isinstance(source, (bytes, bytearray)):
            try:
                source = bytes(source).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError([ParseDiagnostic(1, exc.start + 1, "input is not valid UTF-8")]) from None
        p = _Parser(tokenize(source))
        p.program()
        if p.qreg is None:
            t = p.tok
            raise ParseError([ParseDiagnostic(t.line, t.column, "no qreg declared")])
        ncl = p.creg[1] if p.creg else 0
        return QuantumCircuit(p.qreg[1], p.ops, ncl)
    except ParseError:
        raise
    except RecursionError:
        raise ParseError([ParseDiagnostic(1, 1, "expression nested too deeply")]) from None
    except (ValueError, OverflowError) as exc:
        raise ParseError([ParseDiagnostic(1, 1, str(exc))]) from None


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _op_text(op) -> str:
    q = lambda k: f"q[{k}]"  # noqa: E731
    if isinstance(op, Barrier):
        return "barrier " + ",".join(q(k) for k in op.qubits) + ";"
    if isinstance(op, MeasureOp):
        return f"measure q[{op.qubit}] -> c[{op.clbit}];"
    nc = len(op.controls)
    if op.kind == "swap":
        name = "swap"
    elif nc == 0:
        name = op.kind
    elif nc == 1 and op.kind in ("x", "z", "p"):
        name = "c" + op.kind
    elif nc == 2 and op.kind == "x":
        name = "ccx"
    else:
        raise ValueError(f"gate {op.name!r} has no OpenQASM 2 spelling in this subset")
    par = "(" + ",".join(_fmt(a) for a in op.params) + ")" if op.params else ""
    return f"{name}{par} " + ",".join(q(k) for k in op.qubits) + ";"


def serialize(c: QuantumCircuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    if c.num_clbits:
        lines.append(f"creg c[{c.num_clbits}];")
    lines.extend(_op_text(op) for op in c.ops)
    return "\n".join(lines) + "\n"


def invert_circuit(c: QuantumCircuit) -> QuantumCircuit:
    """Reverse the op order and invert every gate; barriers are kept."""
    if c.has_measurements():
        raise ValueError("cannot invert a circuit with measurements")
    ops = [op if isinstance(op, Barrier) else invert_gate(op) for op in reversed(c.ops)]
    return QuantumCircuit(c.num_qubits, ops, c.num_clbits)
