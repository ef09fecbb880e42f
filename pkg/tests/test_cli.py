import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gasketvar.cli import load_config, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_stats(capsys, tmp_path):
    code, out, _ = run(capsys, "build", "--N", "3", "--m", "2", "--out", str(tmp_path / "g.json"))
    assert code == 0
    assert "vertices=15 edges=27 cells=9" in out
    data = json.loads((tmp_path / "g.json").read_text())
    assert len(data["vertices"]) == 15 and len(data["weights"]) == 15


def test_build_interval(capsys):
    code, out, _ = run(capsys, "build", "--N", "2", "--m", "0")
    assert code == 0 and "vertices=2 edges=1" in out


def test_build_rejects_small_n(capsys):
    code, _, err = run(capsys, "build", "--N", "1")
    assert code == 2 and "N >= 2" in err


def test_build_resource_cap(capsys):
    code, _, err = run(capsys, "build", "--N", "3", "--m", "9", "--cap", "100")
    assert code == 3


def test_verify_default_passes(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--N", "3", "--m", "4", "--seed", "42", "--out", str(tmp_path / "v.json"))
    assert code == 0
    report = json.loads((tmp_path / "v.json").read_text())
    assert report["passed"] and all(c["passed"] for c in report["checks"])


def test_verify_corruption_fails(capsys):
    code, out, _ = run(capsys, "verify", "--N", "3", "--m", "4", "--corrupt-energy-factor", "1.01")
    assert code == 1
    assert "FAIL harmonic_extension" in out


def test_verify_sigma_interval(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--N", "2", "--m", "4", "--out", str(tmp_path / "v.json"))
    assert code == 0 and "sigma=0.5" in out
    assert json.loads((tmp_path / "v.json").read_text())["sigma"] == 0.5


def test_verify_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "verify", "--N", "4", "--m", "3", "--seed", "7", "--out", str(a))
    run(capsys, "verify", "--N", "4", "--m", "3", "--seed", "7", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_lambda_star_example(capsys, tmp_path):
    code, out, _ = run(capsys, "lambda-star", "--N", "3", "--m", "2", "--out", str(tmp_path / "l.json"))
    assert code == 0
    assert "lambda_star=3.997594e-03" in out
    assert "lambda_star_bound=3.341612e-03" in out
    data = json.loads((tmp_path / "l.json").read_text())
    assert data["bound"]["lambda_star"] == pytest.approx(2 * np.exp(-2) / 81, rel=1e-6)


def test_lambda_star_interval_bound(capsys):
    code, out, _ = run(capsys, "lambda-star", "--N", "2", "--m", "2")
    assert "lambda_star_bound=5.523889e-03" in out


def test_lambda_star_constant_f(capsys, tmp_path):
    code, out, _ = run(capsys, "lambda-star", "--N", "3", "--m", "2", "--f", "1", "--out", str(tmp_path / "l.json"))
    assert code == 0 and "+inf (" in out
    assert json.loads((tmp_path / "l.json").read_text())["result"]["lambda_star"] == "+inf"


def test_solve_linear_fixture(capsys, tmp_path):
    out_path = tmp_path / "s.json"
    code, out, _ = run(
        capsys, "solve", "--N", "2", "--m", "8", "--a", "0", "--f", "1", "--lambda", "2", "--out", str(out_path)
    )
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["result"]["sup_u"] == pytest.approx(0.25, abs=1e-12)
    assert "sup_u=2.500000e-01" in out and "converged=True" in out


def test_solve_needs_lambda(capsys):
    code, _, err = run(capsys, "solve", "--N", "3", "--m", "2")
    assert code == 2


def test_solve_nonconverged_exit(capsys):
    argv = ["solve", "--N", "3", "--m", "3", "--lambda", "1e-3", "--max-iter", "1", "--tol", "1e-30"]
    assert main(argv) == 1
    assert main(argv + ["--allow-nonconverged"]) == 0
    capsys.readouterr()


def test_bad_expression(capsys):
    code, _, err = run(capsys, "solve", "--N", "3", "--m", "2", "--f", "exp(u", "--lambda", "1e-3")
    assert code == 2 and "offset" in err


def test_hypothesis_violation(capsys):
    code, _, err = run(capsys, "solve", "--N", "3", "--m", "2", "--a", "1", "--lambda", "1e-3")
    assert code == 2


def test_sweep_csv(capsys, tmp_path):
    out_path = tmp_path / "sweep.json"
    code, _, _ = run(
        capsys, "sweep", "--N", "3", "--m", "3", "--lambda-grid", "0.1,0.3,0.5,0.7,0.9",
        "--relative-to", "bound", "--out", str(out_path),
    )
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    I = [float(r["I_lambda"]) for r in rows]
    assert len(rows) == 5 and all(x < 0 for x in I)
    assert all(b < a for a, b in zip(I, I[1:]))


def test_eigen_interval(capsys):
    code, out, _ = run(capsys, "eigen", "--N", "2", "--m", "8", "-k", "2")
    assert code == 0
    assert float(out.split()[0]) == pytest.approx(9.8696, rel=0.01)


def test_eigen_raw(capsys, tmp_path):
    code, out, _ = run(capsys, "eigen", "--N", "3", "--m", "1", "-k", "3", "--raw", "--out", str(tmp_path / "e.json"))
    assert code == 0
    assert json.loads((tmp_path / "e.json").read_text())["result"]["normalization"] == "raw"


def test_config_file_merged_under_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 4, "m": 3, "f": "sin(u)"}))
    rc = load_config(["build", "--config", str(cfg), "--m", "1"])
    assert (rc.N, rc.m, rc.f) == (4, 1, "sin(u)")
    assert rc.to_json()["command"] == "build"


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "build", "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gasketvar", "build", "--N", "3", "--m", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "vertices=15 edges=27 cells=9" in proc.stdout
