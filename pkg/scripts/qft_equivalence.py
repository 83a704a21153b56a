"""Peak DD sizes of the alternating equivalence check on QFT circuits.

Compares the four application strategies on a controlled-phase QFT against a
variant with every controlled phase decomposed into p/cx gates (barriers mark
one block per original gate).

    python3 scripts/qft_equivalence.py --max-qubits 7
"""
import argparse
import math
import time
from dataclasses import dataclass

from qdd import Manager, QuantumCircuit, Strategy, check_alternating, node_count, system_matrix


@dataclass
class Config:
    min_qubits: int = 2
    max_qubits: int = 6


def qft(n: int) -> QuantumCircuit:
    c = QuantumCircuit(n)
    for t in range(n - 1, -1, -1):
        c.h(t)
        for k, ctrl in enumerate(range(t - 1, -1, -1), start=2):
            c.cp(2 * math.pi / 2**k, ctrl, t)
    for a in range(n // 2):
        c.swap(n - 1 - a, a)
    return c


def qft_decomposed(n: int) -> QuantumCircuit:
    c = QuantumCircuit(n)
    first = True
    for op in qft(n).gates:
        if not first:
            c.barrier()
        first = False
        if op.kind == "p" and op.controls:
            th = op.params[0]
            (a,), (b,) = op.controls, op.targets
            c.p(th / 2, a).cx(a, b).p(-th / 2, b).cx(a, b).p(th / 2, b)
        elif op.kind == "swap":
            a, b = op.targets
            c.cx(a, b).cx(b, a).cx(a, b)
        else:
            c.append(op)
    return c


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--min-qubits", type=int, default=Config.min_qubits)
    p.add_argument("--max-qubits", type=int, default=Config.max_qubits)
    cfg = Config(**vars(p.parse_args()))

    header = ["n", "full"] + [s.value for s in Strategy] + ["seconds"]
    print("  ".join(f"{h:>14}" for h in header))
    for n in range(cfg.min_qubits, cfg.max_qubits + 1):
        m = Manager()
        g, g2 = qft(n), qft_decomposed(n)
        full = node_count(system_matrix(g, m).root)
        row = [n, full]
        t0 = time.perf_counter()
        for s in Strategy:
            r = check_alternating(g, g2, s, m)
            assert r.verdict.passed, (n, s, r.verdict)
            row.append(r.stats["peak_nodes"])
        row.append(round(time.perf_counter() - t0, 3))
        print("  ".join(f"{x:>14}" for x in row))


if __name__ == "__main__":
    main()
