import json
import subprocess
import sys

import pytest

from descff.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_eval_points(capsys):
    code, doc = run(capsys, "eval", "--element", "c-1^2", "--x", "1+0.2i,-0.7+1i", "--a", "0.1")
    assert code == 0 and doc["schema"] == "descff/1"
    x1, x2 = 1 + 0.2j, -0.7 + 1j
    import math
    expected = 4 * math.cos(0.1 * math.pi) ** 2 * (x1 + x2) ** 2
    got = complex(doc["result"]["value"]["re"], doc["result"]["value"]["im"])
    assert abs(got - expected) < 1e-12


def test_eval_theta_gives_form_factor(capsys):
    code, doc = run(capsys, "eval", "--theta", "0.3,-0.4", "--a", "0.1")
    assert code == 0 and "form_factor" in doc


def test_eval_seeded_points_reproducible(capsys):
    args = ("eval", "--n", "5", "--seed", "7", "--a", "0.2", "--element", "c-2")
    _, first = run(capsys, *args)
    _, second = run(capsys, *args)
    assert first == second


def test_eval_usage_errors(capsys):
    assert run(capsys, "eval", "--x", "1,2")[0] == 2
    assert run(capsys, "eval", "--a", "0.1")[0] == 2
    assert run(capsys, "eval", "--a", "0.1", "--x", "1,zz")[0] == 2
    assert run(capsys, "eval", "--a", "0.1", "--x", "1", "--n", "3")[0] == 2


def test_eval_pole_is_domain_error(capsys):
    code, doc = run(capsys, "eval", "--a", "0.1", "--x", "1,1")
    assert code == 2 and doc["error"] == "PoleError"


def test_bad_flags(capsys):
    assert main(["nonsense"]) == 2
    assert main(["eval", "--tol", "-1", "--a", "0", "--x", "1"]) == 2
    capsys.readouterr()


@pytest.mark.parametrize("suite", ["oracle", "residues", "reflection", "eom", "em", "kink"])
def test_verify_suites(capsys, suite):
    code, doc = run(capsys, "verify", "--suite", suite, "--p", "0.31")
    assert code == 0, [c for c in doc["checks"] if not c["pass"]]
    assert doc["failed"] == 0 and doc["passed"] > 0


def test_verify_failure_exit_code(capsys):
    code, doc = run(capsys, "verify", "--suite", "eom", "--tol", "1e-30")
    assert code == 1 and doc["failed"] > 0


def test_verify_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        main(["verify", "--suite", "all", "--seed", "3", "--json-out", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"time" not in outs[0]


def test_reflect(capsys):
    code, doc = run(capsys, "reflect", "--n", "2", "--a", "0.13", "--p", "0.31")
    assert code == 0 and doc["solution"]["residual"] < 1e-8
    assert doc["solution"]["basis"] == ["c-2", "c-1^2"]


def test_reflect_degenerate_names_lattice_point(capsys):
    code, doc = run(capsys, "reflect", "--n", "2", "--a", "0.15", "--p", "0.3")
    assert code == 2 and "p/2" in doc["message"]


def test_reflect_needs_level(capsys):
    assert run(capsys, "reflect", "--a", "0.1")[0] == 2


def test_constants(capsys):
    code, doc = run(capsys, "constants", "--a", "0.1", "--theta", "0.5")
    assert code == 0
    names = [c["name"] for c in doc["constants"]]
    assert names[:3] == ["lambda_prime", "G_a", "R_a"] and len(names) == 4
    lam = doc["constants"][0]
    assert abs(lam["re"] - 0.89616593082862294969) < 1e-12


def test_constants_bad_coupling(capsys):
    assert run(capsys, "constants", "--p", "1.5")[0] == 2


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "descff.cli", "constants"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["command"] == "constants"
