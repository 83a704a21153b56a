"""Detection rate of single-stimulus simulation checking.

A random circuit G is compared with G' = G preceded by an X gate carrying c
controls.  The difference D = U^dagger U' then differs from the identity in
2^(n-c) columns, so one uniformly drawn basis state exposes the difference
with probability 2^(n-c) / 2^n.

    python3 scripts/detection_rate.py --qubits 4 --trials 2000
"""
import argparse
from dataclasses import dataclass

import numpy as np

from qdd import GateOp, QuantumCircuit, Verdict, check_simulation


@dataclass
class Config:
    qubits: int = 3
    trials: int = 1000
    depth: int = 12
    seed: int = 0


def random_circuit(rng, n, depth):
    c = QuantumCircuit(n)
    for _ in range(depth):
        if n > 1 and rng.random() < 0.3:
            a, b = rng.choice(n, 2, replace=False)
            c.cx(int(a), int(b))
        else:
            k = ["h", "x", "y", "z", "s", "t"][rng.integers(6)]
            c.gate(k, int(rng.integers(n)))
    return c


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in ("qubits", "trials", "depth", "seed"):
        ap.add_argument(f"--{f}", type=int, default=getattr(Config, f))
    cfg = Config(**vars(ap.parse_args()))
    n = cfg.qubits
    print(f"{'controls':>8}  {'expected':>8}  {'observed':>8}")
    for c in range(n):
        hits = 0
        for t in range(cfg.trials):
            rng = np.random.default_rng((cfg.seed, c, t))
            g = random_circuit(rng, n, cfg.depth)
            target = int(rng.integers(n))
            others = [q for q in range(n) if q != target]
            controls = tuple(int(q) for q in rng.choice(others, c, replace=False))
            g2 = QuantumCircuit(n, [GateOp("x", (target,), controls)] + g.ops)
            hits += check_simulation(g, g2, 1, seed=t).verdict == Verdict.NON_EQUIVALENT
        print(f"{c:>8}  {2.0 ** -c:>8.4f}  {hits / cfg.trials:>8.4f}")


if __name__ == "__main__":
    main()
