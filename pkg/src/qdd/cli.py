"""Command-line driver: ``qdd sim | noise | verify | dot``.

Results are printed as JSON on stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import TOLERANCE, Manager, node_count
from .dot import DOT_LIMIT, to_dot
from .equivalence import (
    Strategy,
    Verdict,
    check_alternating,
    check_construction,
    check_simulation,
    system_matrix,
)
from .noise import ChannelError, deterministic_simulate, diagonal_probabilities, parse_noise_model, stochastic_simulate
from .qasm import ParseError, parse
from .simulator import RNG_ALGORITHM, sample, simulate
from .vector import bitstring_state, to_amplitudes

EXIT_OK = 0
EXIT_NONEQUIVALENT = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3
EXIT_CHANNEL = 4

AMPLITUDE_LIMIT = 20

STRATEGIES = {
    "naive": Strategy.NAIVE,
    "one2one": Strategy.ONE_TO_ONE,
    "proportional": Strategy.PROPORTIONAL,
    "barrier": Strategy.BARRIER_GUIDED,
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror}") from None


def _load_circuit(path: str):
    data = _read(path)
    try:
        return parse(data), data
    except ParseError as exc:
        msg = "\n".join(f"{path}:{d}" for d in exc.diagnostics)
        raise CliError(EXIT_INPUT, msg) from None


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _engine(mgr: Manager, extra: dict | None = None) -> dict:
    out = {
        "version": __version__,
        "scheme": mgr.scheme,
        "tolerance": TOLERANCE,
        "rng": RNG_ALGORITHM,
        "live_nodes": mgr.live_nodes(),
    }
    out.update(extra or {})
    return out


def _complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _initial(args, n: int, mgr: Manager):
    if args.initial is None:
        return None
    bits = args.initial
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise CliError(EXIT_INPUT, f"--initial must be a {n}-character bitstring")
    return bitstring_state(bits, mgr)


def cmd_sim(args) -> tuple[dict, int]:
    c, data = _load_circuit(args.circuit)
    mgr = Manager(scheme=args.scheme)
    init = _initial(args, c.num_qubits, mgr)
    inputs = {"circuit": _digest(data)}
    if args.amplitudes:
        if c.num_qubits > AMPLITUDE_LIMIT:
            raise CliError(EXIT_LIMIT, f"--amplitudes is limited to {AMPLITUDE_LIMIT} qubits")
        try:
            final = simulate(c.without_final_measurements(), init, mgr)
        except ValueError as exc:
            raise CliError(EXIT_INPUT, str(exc)) from None
        amps = to_amplitudes(final, limit=AMPLITUDE_LIMIT)
        n = c.num_qubits
        result = {
            "amplitudes": {format(i, f"0{n}b"): _complex(a) for i, a in enumerate(amps)},
            "nodes": node_count(final.root),
        }
    else:
        hist = sample(c, args.shots, seed=args.seed, initial=init, mgr=mgr)
        result = {"shots": args.shots, "histogram": hist}
    return {"inputs": inputs, "result": result, "engine": _engine(mgr)}, EXIT_OK


def cmd_noise(args) -> tuple[dict, int]:
    c, data = _load_circuit(args.circuit)
    model_bytes = _read(args.model)
    try:
        model = parse_noise_model(model_bytes.decode("utf-8"))
        model.validate(c.num_qubits)
    except ChannelError as exc:
        r = exc.report
        payload = {
            "max_deviation": r.max_deviation,
            "position": r.position,
            "message": r.message,
        }
        raise CliError(EXIT_CHANNEL, "channel violation: " + json.dumps(payload, sort_keys=True)) from None
    except (ValueError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_INPUT, f"{args.model}: {exc}") from None
    mgr = Manager(scheme=args.scheme)
    try:
        circuit = c.without_final_measurements()
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    n = c.num_qubits
    if args.mode == "deterministic":
        if n > AMPLITUDE_LIMIT:
            raise CliError(EXIT_LIMIT, f"deterministic mode is limited to {AMPLITUDE_LIMIT} qubits")
        rho = deterministic_simulate(circuit, model, mgr=mgr)
        probs = diagonal_probabilities(rho)
        result = {
            "mode": "deterministic",
            "probabilities": {format(i, f"0{n}b"): float(p) for i, p in enumerate(probs)},
            "nodes": node_count(rho.root),
        }
    else:
        hist = stochastic_simulate(circuit, model, args.shots, seed=args.seed, mgr=mgr, workers=args.workers)
        result = {"mode": "stochastic", "shots": args.shots, "histogram": hist}
    inputs = {"circuit": _digest(data), "model": _digest(model_bytes)}
    return {"inputs": inputs, "result": result, "engine": _engine(mgr)}, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    a, da = _load_circuit(args.circuit_a)
    b, db = _load_circuit(args.circuit_b)
    if a.num_qubits != b.num_qubits:
        raise CliError(EXIT_INPUT, f"qubit-count mismatch: {a.num_qubits} vs {b.num_qubits}")
    try:
        a = a.without_final_measurements()
        b = b.without_final_measurements()
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    mgr = Manager(scheme=args.scheme)
    if args.method == "construct":
        res = check_construction(a, b, mgr)
    elif args.method == "alternate":
        res = check_alternating(a, b, STRATEGIES[args.strategy], mgr)
    else:
        k = args.stimuli
        if not 1 <= k <= 1 << a.num_qubits:
            raise CliError(EXIT_INPUT, f"--stimuli must lie in [1, {1 << a.num_qubits}]")
        res = check_simulation(a, b, k, seed=args.seed, epsilon=args.epsilon, mgr=mgr)
    result = {"method": args.method, "verdict": res.verdict.value, "stats": res.stats}
    if res.global_phase is not None:
        result["global_phase"] = res.global_phase
    if res.verdict == Verdict.EQUIVALENT:
        result["global_phase"] = 0.0
    if res.counterexample is not None:
        i, f = res.counterexample
        result["counterexample"] = {
            "index": i,
            "bitstring": format(i, f"0{a.num_qubits}b"),
            "fidelity": f,
        }
    inputs = {"circuit_a": _digest(da), "circuit_b": _digest(db)}
    code = EXIT_OK if res.verdict.passed else EXIT_NONEQUIVALENT
    return {"inputs": inputs, "result": result, "engine": _engine(mgr)}, code


def cmd_dot(args) -> tuple[dict, int]:
    c, data = _load_circuit(args.circuit)
    if c.num_qubits > DOT_LIMIT:
        raise CliError(EXIT_LIMIT, f"DOT export is limited to {DOT_LIMIT} qubits")
    mgr = Manager(scheme=args.scheme)
    try:
        c = c.without_final_measurements()
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    if args.matrix:
        root = system_matrix(c, mgr).root
    else:
        root = simulate(c, _initial(args, c.num_qubits, mgr), mgr).root
    text = to_dot(root, c.num_qubits)
    Path(args.output).write_text(text, encoding="utf-8")
    result = {"kind": "matrix" if args.matrix else "state", "output": args.output, "nodes": node_count(root)}
    return {"inputs": {"circuit": _digest(data)}, "result": result, "engine": _engine(mgr)}, EXIT_OK


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scheme", choices=["l2", "leftmost"], default="l2")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--no-timing", action="store_true", help="report wall_time as 0 for byte-identical output")

    sp = sub.add_parser("sim", help="simulate a circuit")
    sp.add_argument("circuit")
    sp.add_argument("--shots", type=_positive, default=1024)
    sp.add_argument("--initial", help="msb-first bitstring of the input basis state")
    sp.add_argument("--amplitudes", action="store_true", help="dump the final state vector")
    common(sp)
    sp.set_defaults(func=cmd_sim)

    sp = sub.add_parser("noise", help="noise-aware simulation")
    sp.add_argument("circuit")
    sp.add_argument("--model", required=True)
    sp.add_argument("--mode", choices=["stochastic", "deterministic"], default="stochastic")
    sp.add_argument("--shots", type=_positive, default=1024)
    sp.add_argument("--workers", type=_positive, default=1)
    common(sp)
    sp.set_defaults(func=cmd_noise)

    sp = sub.add_parser("verify", help="check two circuits for equivalence")
    sp.add_argument("circuit_a")
    sp.add_argument("circuit_b")
    sp.add_argument("--method", choices=["construct", "alternate", "simulate"], default="alternate")
    sp.add_argument("--strategy", choices=list(STRATEGIES), default="proportional")
    sp.add_argument("--stimuli", type=_positive, default=16)
    sp.add_argument("--epsilon", type=float, default=1e-10)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("dot", help="write a DOT rendering of a state or operator DD")
    sp.add_argument("circuit")
    sp.add_argument("output")
    kind = sp.add_mutually_exclusive_group()
    kind.add_argument("--state", action="store_true", help="final state (default)")
    kind.add_argument("--matrix", action="store_true", help="system matrix")
    sp.add_argument("--initial")
    common(sp)
    sp.set_defaults(func=cmd_dot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        report, code = args.func(args)
    except CliError as exc:
        print(f"qdd {args.command}: {exc}", file=sys.stderr)
        return exc.code
    wall = 0.0 if args.no_timing else time.perf_counter() - t0
    out = {"schema": 1, "command": args.command, "seed": args.seed, "wall_time": wall}
    out.update(report)
    print(json.dumps(out, sort_keys=True, indent=2, default=_json_default))
    return code


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


if __name__ == "__main__":
    sys.exit(main())
