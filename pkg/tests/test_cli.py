import json
import subprocess
import sys

import pytest

from machgame.cli import main, parse_budget, UsageError
from machgame.scenarios import SOURCES


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in SOURCES.items():
        p = tmp_path / f"{name}.game"
        p.write_text(text())
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate(files, capsys):
    code, out, _ = run(capsys, "validate", files["figure2"])
    assert code == 0 and out == "valid=true\n"


def test_expected_utility(files, capsys):
    code, out, _ = run(capsys, "expected-utility", files["figure2"], "M1")
    assert code == 0 and "utility=11/4" in out
    code, out, _ = run(capsys, "expected-utility", files["mediated"], "C,C")
    assert out.splitlines()[-2:] == ["utility=3", "utility=3"]


def test_nash(files, capsys):
    code, out, _ = run(capsys, "nash", files["rps"])
    assert code == 1 and "count=0" in out
    code, out, _ = run(capsys, "nash", files["kolmo"])
    assert code == 0 and out.startswith("nash=M\n")


def test_beliefs(files, capsys):
    code, out, _ = run(capsys, "beliefs", files["guessbit"], "M")
    assert code == 0
    assert "belief=1:b1 | t=(1) q0>b1 c=0 | 1" in out.splitlines()


def test_seqeq_modes(files, capsys):
    code, out, _ = run(capsys, "seqeq", files["figure2"], "M0", "--mode", "interim")
    assert code == 1 and "witness=1:q1:M1:2:9/4" in out
    code, out, _ = run(capsys, "seqeq", files["figure2"], "M0", "--mode", "exante",
                       "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] is True and doc["kind"] == "exante"


def test_convert_and_prune(files, capsys):
    code, out, _ = run(capsys, "convert", files["guessbit"], "M")
    assert code == 0 and "profile=MFIX" in out and "iterations=1" in out
    code, out, _ = run(capsys, "prune", files["guessbit"], "M")
    assert code == 0 and "states=q0 b0 H" in out


def test_scenario(capsys):
    code, out, _ = run(capsys, "scenario", "figure2")
    assert code == 0 and "passed=true" in out


def test_budget_override(files, capsys):
    code, out, _ = run(capsys, "expected-utility", files["figure2"], "M0", "--budget",
                       "steps=2")
    # M0 needs three steps on type 1, so that run yields no output
    assert code == 0 and "utility=0" in out
    assert parse_budget("steps=5, tape=9") == {"max_steps": 5, "tape_window": 9}
    with pytest.raises(UsageError):
        parse_budget("speed=3")


def test_errors_exit_2(files, capsys):
    assert run(capsys, "nash", "/does/not/exist")[0] == 2
    code, _, err = run(capsys, "expected-utility", files["rps"], "rock")
    assert code == 2 and "profile needs 2 machines" in err
    assert run(capsys, "convert", files["mediated"], "C,C")[0] == 2
    assert run(capsys, "seqeq", files["figure2"], "M0")[0] == 2  # --mode is required
    assert run(capsys, "scenario", "nope")[0] == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "machgame", "nash", files["figure2"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "nash=M0\ncount=1\n"
