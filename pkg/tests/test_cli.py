import json
import math
import subprocess
import sys
from pathlib import Path

import pydot
import pytest

from qdd.cli import main

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def circ(name):
    return CIRCUITS / name


def test_sim_bell_histogram(capsys):
    code, rep, _ = run(capsys, "sim", circ("bell.qasm"), "--shots", 1000, "--seed", 7)
    assert code == 0
    assert rep["schema"] == 1 and rep["command"] == "sim" and rep["seed"] == 7
    assert set(rep["result"]["histogram"]) <= {"00", "11"}
    assert sum(rep["result"]["histogram"].values()) == 1000
    assert rep["engine"]["scheme"] == "l2"
    assert len(rep["inputs"]["circuit"]) == 64


def test_sim_amplitudes(capsys):
    code, rep, _ = run(capsys, "sim", circ("qft3.qasm"), "--amplitudes", "--initial", "000")
    assert code == 0
    for re_, im in rep["result"]["amplitudes"].values():
        assert re_ == pytest.approx(1 / math.sqrt(8), abs=1e-12) and abs(im) < 1e-12
    code, rep, _ = run(capsys, "sim", circ("psi_prep.qasm"), "--amplitudes", "--scheme", "leftmost")
    assert rep["result"]["amplitudes"]["110"][0] == pytest.approx(-0.70711, abs=1e-5)
    assert rep["result"]["nodes"] == 4


def test_sim_is_byte_reproducible(capsys):
    args = ["sim", circ("qft3.qasm"), "--shots", 5000, "--seed", 3, "--no-timing"]
    main([str(a) for a in args])
    first = capsys.readouterr().out
    main([str(a) for a in args])
    assert capsys.readouterr().out == first


def test_parse_failure_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.qasm"
    bad.write_text("qreg q[2];\nh q[5];\n")
    code, rep, err = run(capsys, "sim", bad)
    assert code == 2 and rep is None
    assert "2:5" in err and "qubit index out of range" in err
    code, _, _ = run(capsys, "sim", tmp_path / "missing.qasm")
    assert code == 2
    code, _, _ = run(capsys, "sim", circ("bell.qasm"), "--initial", "012")
    assert code == 2


def test_limit_exit_3(tmp_path, capsys):
    big = tmp_path / "big.qasm"
    big.write_text("qreg q[21]; h q[0];")
    code, _, _ = run(capsys, "sim", big, "--amplitudes")
    assert code == 3
    code, _, _ = run(capsys, "dot", big, tmp_path / "x.dot")
    assert code == 3


def test_noise_deterministic(capsys):
    code, rep, _ = run(capsys, "noise", circ("bell.qasm"), "--model", circ("damping.noise"), "--mode", "deterministic")
    assert code == 0
    probs = rep["result"]["probabilities"]
    assert [probs[k] for k in ("00", "01", "10", "11")] == pytest.approx([0.5, 0, 0.15, 0.35], abs=1e-8)
    assert len(rep["inputs"]["model"]) == 64


def test_noise_stochastic(capsys):
    code, rep, _ = run(capsys, "noise", circ("bell.qasm"), "--model", circ("damping.noise"), "--shots", 100_000, "--seed", 2)
    assert code == 0
    hist = rep["result"]["histogram"]
    for k, p in (("00", 0.5), ("10", 0.15), ("11", 0.35)):
        assert hist[k] / 100_000 == pytest.approx(p, abs=0.01)


def test_noise_channel_violation_exit_4(capsys):
    code, _, err = run(capsys, "noise", circ("bell.qasm"), "--model", circ("broken.noise"))
    assert code == 4
    assert "max_deviation" in err


def test_noise_bad_model_exit_2(tmp_path, capsys):
    m = tmp_path / "m.noise"
    m.write_text("channel=unknown p=0.1\n")
    code, _, _ = run(capsys, "noise", circ("bell.qasm"), "--model", m)
    assert code == 2


@pytest.mark.parametrize("strategy", ["naive", "one2one", "proportional", "barrier"])
def test_verify_qft_alternate(capsys, strategy):
    code, rep, _ = run(capsys, "verify", circ("qft3.qasm"), circ("qft3_alt.qasm"), "--strategy", strategy)
    assert code == 0
    assert rep["result"]["verdict"].startswith("equivalent")
    assert rep["result"]["stats"]["final_nodes"] == 3


def test_verify_counterexample(tmp_path, capsys):
    text = circ("qft3.qasm").read_text().replace("h q[1];", "h q[1];\nt q[1];")
    mutated = tmp_path / "mut.qasm"
    mutated.write_text(text)
    code, rep, _ = run(capsys, "verify", circ("qft3.qasm"), mutated, "--method", "simulate", "--stimuli", 8)
    assert code == 1
    ce = rep["result"]["counterexample"]
    assert 0 <= ce["index"] < 8 and ce["fidelity"] < 1 - 1e-10
    code, rep, _ = run(capsys, "verify", circ("qft3.qasm"), mutated, "--method", "construct")
    assert code == 1 and rep["result"]["verdict"] == "non-equivalent"


def test_verify_self_construct(capsys):
    code, rep, _ = run(capsys, "verify", circ("qft3.qasm"), circ("qft3.qasm"), "--method", "construct")
    assert code == 0
    assert rep["result"]["global_phase"] == 0.0


def test_verify_qubit_mismatch(capsys):
    code, _, _ = run(capsys, "verify", circ("qft3.qasm"), circ("bell.qasm"))
    assert code == 2


def test_dot_outputs(tmp_path, capsys):
    out = tmp_path / "qft.dot"
    code, rep, _ = run(capsys, "dot", circ("qft3.qasm"), out, "--matrix")
    assert code == 0 and rep["result"]["nodes"] == 21
    pydot.graph_from_dot_data(out.read_text())
    out2 = tmp_path / "psi.dot"
    code, rep, _ = run(capsys, "dot", circ("psi_prep.qasm"), out2)
    assert code == 0 and rep["result"]["nodes"] == 4


def test_console_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "qdd.cli", "sim", str(circ("bell.qasm")), "--shots", "10"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["shots"] == 10
