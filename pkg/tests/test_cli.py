from __future__ import annotations

import json
import subprocess
import sys
from importlib.resources import files

import pytest

from catalytic.cli import main

DYCK = str(files("catalytic.fixtures").joinpath("dyck.json"))
LONG_JUMP = str(files("catalytic.fixtures").joinpath("long_jump.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def negative(tmp_path):
    p = tmp_path / "neg.json"
    p.write_text('{"d":1,"L":1,"J":1,"Q":[{"s":1,"t":1,"l":0,"j":1,"poly":["1"]},{"s":1,"t":1,"l":1,"j":0,"poly":["-1"]}]}')
    return str(p)


@pytest.fixture
def trivial(tmp_path):
    p = tmp_path / "triv.json"
    p.write_text('{"d":1,"L":1,"J":1,"Q":[]}')
    return str(p)


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--input", DYCK)
    assert code == 0 and out == "valid: d=1 L=1 J=1\n"


def test_validate_negative(capsys, negative):
    code, out, err = run(capsys, "validate", "--input", negative)
    assert code == 2 and out == ""
    assert err.count("\n") == 1 and "Q(s=1,t=1,l=1,j=0)" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", "--input", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read input" in err


@pytest.mark.parametrize("cmd", ["validate", "steps", "oracle", "grammar", "series", "check", "connectivity", "asympt", "report"])
def test_trivial_system_every_command(capsys, trivial, cmd):
    code, _, err = run(capsys, cmd, "--input", trivial)
    assert code == 2 and "TrivialSystemError" in err


def test_check_dyck(capsys):
    code, out, _ = run(capsys, "check", "--input", DYCK, "--oracle-depth", "14")
    assert code == 0
    assert out == "all 6 variables match oracle up to n=14\n"


def test_check_long_jump_json(capsys):
    code, out, _ = run(capsys, "check", "--input", LONG_JUMP, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["format_version"] == 1


def test_check_order_below_depth(capsys):
    code, _, _ = run(capsys, "check", "--input", DYCK, "--order", "5", "--oracle-depth", "8")
    assert code == 2


def test_asympt_dyck(capsys):
    code, out, _ = run(capsys, "asympt", "--input", DYCK, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["rho"] == pytest.approx(0.5, abs=1e-12)
    assert doc["period"] == 2
    assert doc["constants"][0]["c"] == pytest.approx(1.595769, abs=1e-6)


def test_asympt_text(capsys):
    code, out, _ = run(capsys, "asympt", "--input", DYCK, "--empirical-depth", "400")
    assert code == 0 and "period M = 2" in out and "c_0 = 1.595769" in out


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "--input", DYCK, "--order", "6", "--k1", "0", "--k2", "2")
    assert code == 0 and out == "paths(0->2, floor 0): 0 0 1 0 3 0 9\n"


def test_oracle_bad_query(capsys):
    code, _, _ = run(capsys, "oracle", "--input", DYCK, "--k1", "0", "--k2", "1", "--floor", "1")
    assert code == 2


def test_steps_csv(capsys):
    code, out, _ = run(capsys, "steps", "--input", LONG_JUMP, "--format", "csv")
    rows = out.strip().splitlines()
    assert rows[0] == "level,s,t,width,rise,weight,l,j,r"
    assert "3,1,1,1,-2,1,1,3,0" in rows


def test_grammar_difference(capsys):
    code, out, _ = run(capsys, "grammar", "--input", LONG_JUMP, "--difference")
    assert code == 0 and out.count("\n") == 5 and "B_1 = x^2 F_1_2_1" in out


def test_series_var(capsys):
    code, out, _ = run(capsys, "series", "--input", DYCK, "--order", "6", "--var", "F_0_0_0")
    assert out == "F_0_0_0: 1 0 1 0 2 0 5\n"


def test_series_unknown_var(capsys):
    code, _, err = run(capsys, "series", "--input", DYCK, "--var", "nope")
    assert code == 2 and "nope" in err


def test_connectivity_json(capsys):
    code, out, _ = run(capsys, "connectivity", "--input", LONG_JUMP, "--format", "json")
    doc = json.loads(out)
    assert doc["strongly_connected"] and doc["witnesses"]


def test_report(capsys):
    code, out, _ = run(capsys, "report", "--input", LONG_JUMP, "--format", "json", "--empirical-depth", "500")
    doc = json.loads(out)
    assert code == 0
    assert doc["unknown_walks"] == ["A_0_0", "A_1_0", "Ab_2_1"]
    assert doc["check"]["ok"]


def test_outputs_deterministic(capsys):
    a = run(capsys, "report", "--input", LONG_JUMP, "--empirical-depth", "300")
    b = run(capsys, "report", "--input", LONG_JUMP, "--empirical-depth", "300")
    assert a == b


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "catalytic.cli", "validate", "--input", DYCK], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.startswith("valid")
