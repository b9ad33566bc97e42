import json
import subprocess
import sys
from importlib import resources

import pytest

from pcontract.cli import main

INST = resources.files("pcontract") / "instances"


def path(name):
    return str(INST / f"{name}.json")


def run(*args):
    return subprocess.run([sys.executable, "-m", "pcontract", *args], capture_output=True, text=True)


def test_validate_exit_codes(capsys):
    assert main(["validate", path("e2_p2")]) == 0
    assert "valid" in capsys.readouterr().out
    assert main(["validate", path("invalid_d1_p2")]) == 2
    out = capsys.readouterr().out
    assert "counterexample: check=commute" in out


def test_solve_writes_result(tmp_path, capsys):
    out = tmp_path / "res.json"
    assert main(["solve", path("e2_p2"), "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["exact"] and res["oracle_agrees"]
    assert "timings" not in res
    assert capsys.readouterr().out.startswith("xi = [1, 0]*t^1\n")


def test_solve_on_invalid_instance():
    assert main(["solve", path("invalid_d1_p2")]) == 2


def test_solve_under_a_budget(capsys):
    assert main(["solve", path("e2_p2"), "--budget", "1", "--prec", "10"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert not res["exact"] and res["trace"]["phases"][-1] == "general"


def test_timings_are_opt_in(capsys):
    assert main(["solve", path("e2_p2"), "--timings"]) == 0
    assert "solve_seconds" in json.loads(capsys.readouterr().out)["timings"]


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    obj = json.loads((INST / "e2_p2.json").read_text())
    obj["blocks"][0]["entries"][0][1] = 7
    bad.write_text(json.dumps(obj))
    assert main(["validate", str(bad)]) == 4
    assert "$.blocks[0].entries[0][1]" in capsys.readouterr().err
    assert main(["blocks", path("e2_p2"), "--f", "1+x"]) == 4


def test_oracle(capsys):
    assert main(["oracle", path("e2_p2"), "--window", "0", "4"]) == 0
    assert capsys.readouterr().out.strip() == "[1, 0]*t^0"
    assert main(["oracle", path("e2_p2"), "--window", "3", "3"]) == 3


def test_nilpotency_and_blocks(capsys):
    assert main(["nilpotency", path("e2_p2")]) == 0
    assert "class <= 2" in capsys.readouterr().out
    assert main(["nilpotency", path("toeplitz_index3_p3"), "--sweep", "2", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [f"class <= 3 at precision {n}" for n in range(2, 6)]
    assert main(["blocks", path("e2_p2"), "--f", "t^-1"]) == 0
    out = capsys.readouterr().out
    assert "(0, -1): [[0, 1], [0, 0]]" in out


def test_gen_is_byte_identical():
    a = run("gen", "--family", "random", "--p", "3", "--d", "2", "--seed", "9")
    b = run("gen", "--family", "random", "--p", "3", "--d", "2", "--seed", "9")
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout


def test_solve_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"r{k}.json"
        assert run("solve", path("toeplitz_p5_d3_s1"), "--out", str(target)).returncode == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_gen_output_validates(tmp_path):
    target = tmp_path / "g.json"
    assert main(["gen", "--family", "toeplitz", "--p", "3", "--d", "2", "--seed", "7", "--out", str(target)]) == 0
    assert main(["validate", str(target)]) == 0


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
