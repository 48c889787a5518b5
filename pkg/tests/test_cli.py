import math
import subprocess
import sys

import numpy as np
import pytest

from chronoclock import verification
from chronoclock.cli import evaluate, main, parse_clock_sizes, parse_grid, parse_state
from chronoclock.results import from_csv, from_json, load
from chronoclock.verification import CheckResult


def _run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_expressions_and_grids():
    assert evaluate("pi/2") == math.pi / 2
    assert evaluate("1+2j") == 1 + 2j
    with pytest.raises(ValueError):
        evaluate("__import__('os')")
    assert parse_grid("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0:3.2:0.05,pi/2").count(math.pi / 2) == 1
    assert len(parse_grid("0:3.2:0.05")) == 65
    assert parse_clock_sizes("2,4,inf", allow_inf=True) == [2, 4, math.inf]
    with pytest.raises(ValueError):
        parse_clock_sizes("inf", allow_inf=False)
    assert np.allclose(parse_state("+"), np.array([1, 1]) / np.sqrt(2))


def test_bloch_path_rows(capsys):
    code, out, _ = _run(capsys, "run", "bloch-path", "--phi-grid", "0:3.2:0.05,pi/2", "--N", "2,4,16,64,inf")
    assert code == 0
    res = from_csv(out)
    assert res.columns == ("phi", "N", "E2_closed", "E2_dense", "abs_diff")
    assert len(res.rows) == 66 * 5
    row = [r for r in res.records() if r["phi"] == math.pi / 2 and r["N"] == math.inf]
    assert len(row) == 1 and abs(row[0]["E2_closed"] - (1 - 4 / math.pi**2)) <= 1e-12
    finite = [r for r in res.records() if r["N"] != math.inf]
    assert max(r["abs_diff"] for r in finite) <= 1e-9


def test_qubit_clock_identity(capsys):
    code, out, _ = _run(capsys, "run", "qubit-clock", "--U", "identity", "--format", "json")
    assert code == 0
    rec = from_json(out).records()[0]
    assert rec["E2"] == 0 and rec["overlap_r"] == 1


def test_history_and_circuit_agree(capsys):
    _, hist, _ = _run(capsys, "run", "history", "--N", "8", "--energies", "0,pi/4", "--psi0", "+")
    _, circ, _ = _run(capsys, "run", "circuit", "--n", "3", "--energies", "0,pi/4", "--psi0", "+")
    a, b = from_csv(hist), from_csv(circ)
    assert np.abs(np.array(a.column("re")) - np.array(b.column("re"))).max() <= 1e-12
    assert abs(b.meta["fidelity_with_dense"] - 1) <= 1e-12
    assert abs(a.meta["E_vn"] - 1) <= 1e-12


def test_verify_is_deterministic(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CHRONO_THREADS", "1")
    code, first, _ = _run(capsys, "run", "verify", "--suite", "all", "--seed", "7")
    assert code == 0
    lines = first.splitlines()
    assert len(lines) == len(verification.CHECKS) and all(l.startswith("PASS ") for l in lines)
    monkeypatch.setenv("CHRONO_THREADS", "3")
    _, second, _ = _run(capsys, "run", "verify", "--suite", "all", "--seed", "7")
    assert first == second

    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert _run(capsys, "run", "verify", "--suite", "concurrence,permanence", "--seed", "7",
                    "--output", str(p), "--format", "json")[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert load(str(paths[0])).column("check") == ["concurrence", "permanence"]


def test_verify_failure_exits_two(capsys, monkeypatch):
    failing = dict(verification.CHECKS)
    failing["permanence"] = lambda rng: CheckResult("permanence", False, 1.0, 1e-9, "forced")
    monkeypatch.setattr(verification, "CHECKS", failing)
    code, out, err = _run(capsys, "run", "verify", "--suite", "concurrence,permanence,invariance")
    assert code == 2
    assert out.splitlines()[-1].startswith("FAIL permanence")
    assert "invariance" not in out and "permanence" in err


def test_validation_errors_exit_one(capsys, tmp_path):
    assert _run(capsys, "run", "qubit-clock")[0] == 1
    assert _run(capsys, "run", "bloch-path", "--N", "1")[0] == 1
    assert _run(capsys, "run", "nonsense")[0] == 1
    assert _run(capsys, "run", "verify", "--suite", "nope")[0] == 1
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("mode: qubit-clock\nparameters:\n  U: x\n  colour: blue\n")
    code, _, err = _run(capsys, "run", "qubit-clock", "--config", str(cfg))
    assert code == 1 and "parameters" in err
    assert _run(capsys, "run", "qubit-clock", "--config", str(tmp_path / "absent.yaml"))[0] == 1


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text("mode: qubit-clock\nseed: 5\nparameters:\n  U: x\n  psi0: '0'\noutput:\n  format: json\n")
    _, from_file, _ = _run(capsys, "run", "qubit-clock", "--config", str(cfg))
    assert from_json(from_file).records()[0]["E2"] == 1
    _, overridden, _ = _run(capsys, "run", "qubit-clock", "--config", str(cfg), "--U", "identity")
    res = from_json(overridden)
    assert res.records()[0]["E2"] == 0 and res.meta["seed"] == 5


def test_threads_setting(capsys, monkeypatch):
    monkeypatch.setenv("CHRONO_THREADS", "2")
    _, two, _ = _run(capsys, "run", "uncertainty", "--trials", "10", "--seed", "3")
    monkeypatch.setenv("CHRONO_THREADS", "1")
    _, one, _ = _run(capsys, "run", "uncertainty", "--trials", "10", "--seed", "3")
    assert one == two
    assert all(from_csv(one).column("ok"))
    monkeypatch.setenv("CHRONO_THREADS", "-1")
    assert _run(capsys, "run", "uncertainty")[0] == 1


def test_subsystem_and_spectrum_modes(capsys):
    code, out, _ = _run(capsys, "run", "subsystem", "--p", "0.8", "--U", "ry:pi/3", "--psi0", "0")
    assert code == 0
    rec = from_csv(out).records()[0]
    assert abs(rec["C_squared"] - 0.09) <= 1e-9 and rec["ok"]
    code, out, _ = _run(capsys, "run", "spectrum", "--energies", "0,pi/2,pi,3*pi/2", "--N", "4", "--psi0", "0.5,0.5,0.5,0.5")
    assert code == 0
    res = from_csv(out)
    assert np.allclose(res.column("weight"), 0.25) and res.meta["majorized"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chronoclock", "run", "qubit-clock", "--U", "x"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and from_csv(proc.stdout).records()[0]["E2"] == 1
