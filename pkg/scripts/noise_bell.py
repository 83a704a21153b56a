"""Stochastic vs deterministic noise simulation of a damped Bell pair.

Prints the exact outcome distribution and the total-variation distance of
Monte-Carlo histograms for growing shot counts.

    python3 scripts/noise_bell.py --p 0.3 --seeds 5
"""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from qdd import NoiseModel, QuantumCircuit, amplitude_damping, deterministic_simulate, diagonal_probabilities, stochastic_simulate


@dataclass
class Config:
    p: float = 0.3
    seeds: int = 3
    max_shots: int = 100_000


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=Config.p)
    ap.add_argument("--seeds", type=int, default=Config.seeds)
    ap.add_argument("--max-shots", type=int, default=Config.max_shots)
    cfg = Config(**vars(ap.parse_args()))

    c = QuantumCircuit(2).h(1).cx(1, 0)
    model = NoiseModel().add(amplitude_damping(cfg.p), qubits=[0], after=["cx"])
    exact = diagonal_probabilities(deterministic_simulate(c, model))
    print("exact:", {format(i, "02b"): round(float(x), 6) for i, x in enumerate(exact)})

    shots = 100
    while shots <= cfg.max_shots:
        tvds = []
        t0 = time.perf_counter()
        for seed in range(cfg.seeds):
            h = stochastic_simulate(c, model, shots, seed=seed)
            emp = np.array([h.get(format(i, "02b"), 0) for i in range(4)]) / shots
            tvds.append(0.5 * np.abs(emp - exact).sum())
        dt = (time.perf_counter() - t0) / cfg.seeds
        print(f"shots={shots:>7}  mean TVD={np.mean(tvds):.5f}  max TVD={np.max(tvds):.5f}  {dt:.2f} s/run")
        shots *= 10


if __name__ == "__main__":
    main()
