import json
import subprocess
import sys
from pathlib import Path

import pytest

from cosym.cli import run

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def _json(capsys, argv):
    code = run([*argv, "--json"])
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--builtin", "flat-cokahler-r3", "--samples", "20"],
        ["verify", "--builtin", "harmonic-oscillator", "--samples", "10"],
        ["verify", "--scenario", str(SCENARIOS / "inline-cokahler.json"), "--samples", "10"],
        ["reduce", "--builtin", "s1-c2xr", "--samples", "10"],
        ["commute", "--builtin", "s1-c2", "--direction", "kahler->cokahler", "--grid", "10"],
        ["commute", "--direction", "torus", "--torus-map", "rotation", "--grid", "10"],
    ],
)
def test_passing_commands_exit_zero(capsys, argv):
    code, doc = _json(capsys, argv)
    assert code == 0 and doc["pass"] is True and doc["schema"] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--builtin", "contact-r3", "--samples", "10"],
        ["verify", "--builtin", "twisted-kahler", "--samples", "10"],
        ["commute", "--direction", "torus", "--torus-map", "shifted", "--grid", "10"],
    ],
)
def test_failing_checks_exit_two(capsys, argv):
    assert run(argv) == 2
    capsys.readouterr()


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--bogus"],
        ["verify"],
        ["verify", "--builtin", "no-such-thing"],
        ["verify", "--builtin", "flat-cokahler-r3", "--samples", "0"],
        ["reduce", "--builtin", "flat-cokahler-r3"],
        ["flow", "--builtin", "harmonic-oscillator", "--h", "-1"],
        ["commute", "--builtin", "s1-c2", "--direction", "sideways"],
        ["rigid-body", "--M", "1,-2,3"],
        ["verify", "--scenario", "/nonexistent/scenario.json"],
        ["teleport"],
    ],
)
def test_configuration_errors_exit_one(capsys, argv):
    assert run(argv) == 1
    assert "error" in capsys.readouterr().err


def test_scenario_field_error_is_reported(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "verify", "builtin": "flat-cokahler-r3", "sampling": {"seed": "x"}}))
    assert run(["verify", "--scenario", str(bad)]) == 1
    assert "sampling.seed" in capsys.readouterr().err


def test_list_builtins(capsys):
    assert run(["list-builtins"]) == 0
    text = capsys.readouterr().out.splitlines()
    assert len(text) >= 8
    assert run(["list-builtins", "--json"]) == 0
    entries = json.loads(capsys.readouterr().out)
    assert isinstance(entries, list) and {"name", "kind", "description"} <= set(entries[0])


def test_seed_precedence(monkeypatch, capsys):
    monkeypatch.setenv("COSYM_SEED", "17")
    _, doc = _json(capsys, ["verify", "--builtin", "flat-cokahler-r3", "--samples", "5"])
    assert doc["seed"] == 17
    _, doc = _json(capsys, ["verify", "--builtin", "flat-cokahler-r3", "--samples", "5", "--seed", "4"])
    assert doc["seed"] == 4
    monkeypatch.delenv("COSYM_SEED")
    _, doc = _json(capsys, ["reduce", "--scenario", str(SCENARIOS / "s1-c2xr.json"), "--samples", "5"])
    assert doc["seed"] == 7


def test_reports_and_csv_are_written(tmp_path, capsys):
    out, csv = tmp_path / "r.json", tmp_path / "traj.csv"
    argv = ["rigid-body", "--T", "0.2", "--h", "0.01", "--samples", "8", "--out", str(out), "--csv", str(csv)]
    assert run(argv) == 0
    capsys.readouterr()
    assert json.loads(out.read_text())["pass"] is True
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("time,") and len(lines) == 22


def test_flow_scenario(tmp_path, capsys):
    csv = tmp_path / "osc.csv"
    code, doc = _json(capsys, ["flow", "--scenario", str(SCENARIOS / "oscillator.json"), "--T", "1", "--h", "0.01", "--csv", str(csv)])
    assert code == 0
    assert csv.exists()


def test_repeated_runs_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.json"
        cmd = [sys.executable, "-m", "cosym", "reduce", "--builtin", "s1-c2xr", "--samples", "8", "--seed", "3", "--out", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
