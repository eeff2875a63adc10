import json
import os
import subprocess
import sys

import pytest

from quatoric.cli import dispatch, main
from quatoric.config import RunConfig
from quatoric.jsonio import dumps
from quatoric.quatcore import InputError

from conftest import FIXTURES, ROOT

MANIFEST = json.loads((FIXTURES / "manifest.json").read_text())


def _args(entry):
    return [str(ROOT / a) if a.startswith("fixtures/") else a for a in entry["args"]]


@pytest.mark.parametrize("entry", MANIFEST, ids=[" ".join(e["args"][:2]) + f"#{i}" for i, e in enumerate(MANIFEST)])
def test_manifest_exit_codes(entry):
    code, report, summary = dispatch(_args(entry))
    assert code == entry["exit"], (summary, report)
    assert summary


def test_reports_are_byte_identical_across_runs():
    for argv in (["euler", "vanishes", "fixtures/square_euler_coboundary.json"],
                 ["tetra", "trimoment", "--n", "2", "--samples", "5"],
                 ["delzant", "compare", "fixtures/delzant_cycle3_trivial.json",
                  "fixtures/delzant_cycle3_coboundary.json"]):
        argv = [str(ROOT / a) if a.startswith("fixtures/") else a for a in argv]
        first, second = dispatch(argv), dispatch(argv)
        assert first[0] == second[0]
        assert dumps(first[1]) == dumps(second[1])


def test_malformed_json_reports_location():
    code, report, summary = dispatch(["validate", str(FIXTURES / "malformed.json")])
    assert code == 2 and report["error"] == "input"
    assert "malformed.json:" in report["message"] and "invalid JSON" in report["message"]
    line, col = report["message"].split("malformed.json:")[1].split(":")[:2]
    assert int(line) >= 1 and int(col) >= 1


def test_missing_file_and_bad_usage():
    assert dispatch(["validate", str(FIXTURES / "does_not_exist.json")])[0] == 2
    assert dispatch(["no-such-command"])[0] == 2
    assert dispatch(["validate", str(FIXTURES / "square.json"), "--tol", "-1"])[0] == 2


def test_globalize_reports_holonomy():
    code, report, _ = dispatch(["globalize", str(FIXTURES / "cycle3_obstructed.json")])
    assert code == 1 and report["globalizable"] is False and report["cochain"] is None
    assert report["nontrivial_holonomy"]
    assert all({"from", "to", "holonomy"} <= set(h) for h in report["nontrivial_holonomy"])
    code, report, _ = dispatch(["globalize", str(FIXTURES / "square.json")])
    assert code == 0 and report["globalizable"] and report["nontrivial_holonomy"] == []


def test_reports_carry_the_config():
    _, report, _ = dispatch(["validate", str(FIXTURES / "square.json"), "--seed", "7", "--untwisted"])
    assert report["config"]["seed"] == 7 and report["config"]["twisted"] is False


def test_realize_writes_output(tmp_path):
    out = tmp_path / "model.json"
    code, report, _ = dispatch(["delzant", "realize", str(FIXTURES / "delzant_square.json"), "-o", str(out)])
    assert code == 0
    written = json.loads(out.read_text())
    assert written["psi_consistent"] is True


def test_run_config_validation():
    assert RunConfig().to_json()["tol"] == 1e-8
    for bad in ({"tol": 0.0}, {"fd_step": -1e-5}, {"samples": 0}, {"max_search": 0}, {"seed": -1}):
        with pytest.raises(InputError):
            RunConfig(**bad)


def test_run_config_rng_is_deterministic():
    assert RunConfig(seed=3).rng().random() == RunConfig(seed=3).rng().random()
    assert RunConfig(seed=3).rng().random() != RunConfig(seed=4).rng().random()


def test_main_writes_json_to_stdout(capsys):
    assert main(["validate", str(FIXTURES / "square.json")]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["config"]["seed"] == 0
    assert captured.err.strip()


def test_module_entry_point():
    env = dict(os.environ, PYTHONPATH=str(ROOT / "src"))
    proc = subprocess.run([sys.executable, "-m", "quatoric", "validate", str(FIXTURES / "single_chart.json")],
                          capture_output=True, text=True, env=env, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["config"]["tol"] == 1e-8
