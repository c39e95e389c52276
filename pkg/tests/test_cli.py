import io
import json
import subprocess
import sys

import pytest

from aekit.cli import run_cli
from conftest import data_path, read


def run(argv, stdin_text=""):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(argv, io.StringIO(stdin_text), out, err)
    return code, out.getvalue(), err.getvalue()


def test_ae_solve_e1():
    code, out, _ = run(["ae", "solve", data_path("e1.json")])
    assert code == 0
    assert json.loads(out)["equilibria"] == [[[1]]]


def test_metric_rho():
    code, out, _ = run(["metric", "rho", data_path("e1.json"), data_path("e1_shrunk.json")])
    assert code == 0 and json.loads(out) == {"rho": 1.0}


def test_reduce_then_solve_pipeline():
    code, problem, _ = run(["reduce", "gnep", data_path("pd.json"), "--epsilon", "0"])
    assert code == 0
    code, out, _ = run(["ae", "solve", "-"], problem)
    assert code == 0 and json.loads(out)["equilibria"] == [[[1], [1]]]


def test_reduce_relation(tmp_path):
    obj = json.loads(read("pd.json"))
    del obj["objectives"], obj["epsilon"]
    obj["dominance"] = {"1": [{"at": [[0], [0]], "value": [[1]]}, {"at": [[0], [1]], "value": [[1]]}],
                        "2": [{"at": [[0], [0]], "value": [[1]]}, {"at": [[1], [0]], "value": [[1]]}]}
    code, out, _ = run(["reduce", "relation", "-"], json.dumps(obj))
    assert code == 0
    assert out == run(["reduce", "gnep", data_path("pd.json")])[1]


def test_require_solution_on_empty_set(tmp_path):
    obj = json.loads(read("e1.json"))
    obj["preferences"]["1"][1]["value"] = [[0]]
    path = tmp_path / "none.json"
    path.write_text(json.dumps(obj))
    assert run(["ae", "solve", str(path)])[0] == 0
    code, out, _ = run(["ae", "solve", str(path), "--require-solution"])
    assert code == 1 and json.loads(out)["status"] == "no-solution"


def test_gap_and_certify():
    code, out, _ = run(["ae", "gap", data_path("e1.json"), "--point", "[[0]]"])
    assert code == 0 and json.loads(out)["gap"] == 1
    code, out, _ = run(["ae", "gap", data_path("e1.json")])
    assert [e["gap"] for e in json.loads(out)["evaluations"]] == [1, 0]
    code, out, _ = run(["ae", "certify", data_path("e1.json"), "--point", "[[1]]"])
    assert code == 0 and json.loads(out)["accepted"] is True


def test_off_grid_point_is_invalid():
    code, _, err = run(["ae", "certify", data_path("e1.json"), "--point", "[[0.5]]"])
    assert code == 2 and "not on the grid" in err


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["ae", "explode", "x.json"],
    ["ae", "solve", "x.json", "--frobnicate"],
    ["ae", "solve", "x.json", "--tolerances", "bogus=1"],
    ["ae", "solve", "x.json", "--threads", "0"],
    ["regularity", "check", "x.json", "--window", "5..2"],
])
def test_usage_errors(argv):
    code, out, err = run(argv)
    assert code == 2 and out == ""
    assert "usage:" in err


def test_missing_file_and_bad_json(tmp_path):
    assert run(["ae", "solve", str(tmp_path / "absent.json")])[0] == 2
    code, _, err = run(["ae", "solve", "-"], "{\"players\": ")
    assert code == 2 and "line 1" in err


def test_tolerance_override_applies():
    code, out, _ = run(["ae", "solve", data_path("e1.json"), "--tolerances", "feas=1e-6,gap_zero=1e-6"])
    assert code == 0
    code, _, err = run(["ae", "solve", data_path("e1.json"), "--tolerances", "feas=1e-6"])
    assert code == 2 and "gap_zero" in err


def test_regularity_exit_codes(tmp_path):
    assert run(["regularity", "check", data_path("e1.json")])[0] == 0
    obj = json.loads(read("e1.json"))
    obj["preferences"]["1"][1]["value"] = [[1]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    code, out, _ = run(["regularity", "check", str(path)])
    assert code == 3 and json.loads(out)["verdict"] == "FAIL"


def _family_file(tmp_path, targets="both"):
    fam = {"base": data_path("e1.json"),
           "perturbation": {"kind": "shift", "targets": targets,
                            "schedule": {"kind": "geometric", "ratio": 0.5, "count": 25}}}
    path = tmp_path / "family.json"
    path.write_text(json.dumps(fam))
    return str(path)


def test_family_commands(tmp_path):
    path = _family_file(tmp_path)
    code, out, _ = run(["stability", "run", path, "--window", "10..25"])
    report = json.loads(out)
    assert code == 0 and report["verdict"] == "PASS" and report["indices"][0] == 10
    code, out, _ = run(["lsc", "probe", path])
    assert code == 0 and json.loads(out)["verdict"] == "PASS"
    code, out, _ = run(["regularity", "check", path, "--eps-grid", "0.5,0.1"])
    assert code == 0 and json.loads(out)["eps_grid"] == [0.5, 0.1]


def test_stability_fails_when_the_limit_gains_an_improvement(tmp_path):
    # moving only the preferred point makes (0) an equilibrium of every member but not of the limit
    code, out, _ = run(["stability", "run", _family_file(tmp_path, "preferences")])
    report = json.loads(out)
    assert code == 0 and report["verdict"] == "FAIL"
    assert report["excess_trace"][-1] == 1


def test_slmfg_commands():
    code, out, _ = run(["slmfg", "solve", data_path("slmfg_pd.json")])
    sol = json.loads(out)
    assert code == 0 and sol["w"] == [1] and sol["x"] == [[0], [0]] and sol["value"] == 2
    code, out, _ = run(["slmfg", "solve", data_path("slmfg_pd.json"), "--mode", "pessimistic"])
    assert json.loads(out)["x"] == [[1], [1]]
    code, out, _ = run(["slmfg", "probe", data_path("slmfg_pd.json"), "--sequence", "0,1,1",
                        "--target", "1"])
    assert code == 0 and json.loads(out)["verdict"] == "PASS"


def test_slmfg_require_solution(tmp_path):
    obj = json.loads(read("slmfg_pd.json"))
    obj["leader"]["omega"] = []
    for e in obj["signal"]["entries"]:
        e["gnep"] = data_path(e["gnep"])
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(obj))
    code, out, _ = run(["slmfg", "solve", str(path), "--require-solution"])
    assert code == 1 and json.loads(out)["status"] == "no-solution"
    assert run(["slmfg", "solve", str(path)])[0] == 0


def test_output_file_and_pretty(tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(["ae", "solve", data_path("e1.json"), "--pretty", "-o", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text()) == json.loads(run(["ae", "solve", data_path("e1.json")])[1])


def test_metric_hausdorff(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text("[[0, 0], [1, 0]]")
    b.write_text('{"points": [[0, 0]]}')
    code, out, _ = run(["metric", "hausdorff", str(a), str(b)])
    assert code == 0 and json.loads(out) == {"hausdorff": 1, "excess": [1, 0]}


def test_output_independent_of_threads(monkeypatch):
    argv = ["ae", "solve", data_path("e1.json")]
    reports = {run(argv + ["--threads", str(t)])[1] for t in (1, 2, 8)}
    monkeypatch.setenv("AEKIT_THREADS", "4")
    reports.add(run(argv)[1])
    assert len(reports) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aekit", "metric", "rho", data_path("e1.json"),
                           data_path("e1_shrunk.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout) == {"rho": 1}
    proc = subprocess.run([sys.executable, "-m", "aekit", "frob"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage:" in proc.stderr
