import json
import shutil
import subprocess
import sys

import pytest

from hyperphase.cli import main


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_threshold(capsys):
    code, out, _ = call(capsys, "threshold", "--n", 100, "--k", 2, "--j", 1)
    assert code == 0
    d = json.loads(out)
    assert d["p"] == pytest.approx(0.01)
    assert (d["numerator"], d["denominator"]) == (1, 1)


def test_constants(capsys):
    code, out, _ = call(capsys, "constants", "--k", 3, "--j", 2, "--eps", 0.3)
    d = json.loads(out)
    assert code == 0 and d["c_ell"] == [0.75] and d["c_dagger"] == 65536
    assert d["c_main"][0] == 12


def test_giant(capsys):
    code, out, _ = call(capsys, "giant", "--c", 2, "--k", 2)
    assert json.loads(out)["rho"] == pytest.approx(0.79681, abs=1e-5)


def test_sample_and_components(capsys, tmp_path):
    f = tmp_path / "h.txt"
    code, out, _ = call(capsys, "sample", "--n", 12, "--k", 3, "--p", 0.1, "--seed", 5,
                        "--out", f)
    assert code == 0 and json.loads(out)["out"] == str(f)
    assert f.read_text().splitlines()[0] == "12 3 5 numpy.PCG64"
    code, out, _ = call(capsys, "components", "--in", f, "--j", 1)
    d = json.loads(out)
    assert code == 0 and d["n"] == 12 and d["largest"] >= 1


def test_sample_to_stdout(capsys):
    code, out, _ = call(capsys, "sample", "--n", 6, "--k", 3, "--p", 1.0)
    assert code == 0 and len(out.splitlines()) == 1 + 20


def test_explore(capsys, tmp_path):
    tr, ev, pr = tmp_path / "t.txt", tmp_path / "e.csv", tmp_path / "p.csv"
    code, out, _ = call(capsys, "explore", "--alg", "dfs2", "--n", 20, "--k", 3, "--j", 2,
                        "--eps", 0.3, "--budget-alpha", 0.01, "--seed", 1,
                        "--checkpoints", 0, 40, "--trace-out", tr, "--events-out", ev,
                        "--profiles-out", pr)
    d = json.loads(out)
    assert code == 0 and d["algorithm"] == "DFS2" and d["queries"] <= 80
    assert len(tr.read_text().splitlines()) == d["queries"]
    assert ev.read_text().startswith("ell,lset,new_starts,jumps,branchings")
    assert pr.read_text().startswith("t,ell,delta\n0,0,0")


def test_explore_skip_rejects_dfs1(capsys):
    code, _, err = call(capsys, "explore", "--alg", "dfs1", "--backend", "skip", "--n", 20,
                        "--k", 3, "--j", 1, "--p", 0.01)
    assert code == 4
    assert json.loads(err)["error"] == "config"


def test_invalid_input_exit_code(capsys):
    code, _, err = call(capsys, "threshold", "--n", 10, "--k", 3, "--j", 3)
    assert code == 2 and json.loads(err)["error"] == "invalid-input"


def test_missing_file_exit_code(capsys, tmp_path):
    code, _, err = call(capsys, "components", "--in", tmp_path / "none.txt", "--j", 1)
    assert code != 0 and json.loads(err)["error"] == "io"


def test_branching(capsys):
    code, out, _ = call(capsys, "branching", "--r", 2, "--m", 3, "--q", 0.0, "--runs", 3)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "seed,tau,capped,generations"
    assert [ln.split(",")[1:] for ln in lines[1:]] == [["1", "0", "0"]] * 3


def test_sweep_and_summarize(capsys, tmp_path, monkeypatch):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps(dict(kind="subcritical-size", n=100, k=3, j=1, eps=-0.3,
                                    runs=3, master_seed=9)))
    out = tmp_path / "r.jsonl"
    monkeypatch.setenv("HYPERPHASE_WORKERS", "2")
    code, _, err = call(capsys, "sweep", "--spec", spec, "--out", out)
    assert code == 0 and "3 records" in err
    assert len(out.read_text().splitlines()) == 3
    code, text, _ = call(capsys, "summarize", "--in", out)
    rows = text.splitlines()
    assert code == 0 and rows[0].startswith("schema_version,kind") and len(rows) == 2


def test_console_script():
    exe = shutil.which("hyperphase")
    cmd = [exe] if exe else [sys.executable, "-m", "hyperphase.cli"]
    r = subprocess.run(cmd + ["giant", "--c", "1", "--k", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["rho"] == pytest.approx(0.549, abs=1e-3)
