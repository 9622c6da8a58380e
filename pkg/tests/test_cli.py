import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from gaussmdm import cli

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_RUNS = {
    "tradeoff.csv": ["tradeoff", "--gain", "2", "--gain", "0.5", "--optimal", "--points", "5"],
    "window.csv": ["window", "--gain-squared", "0.5", "0.8", "1.0", "1.3"],
    "window.json": ["window", "--gain-squared", "0.5", "1.0", "--format", "json"],
    "certify.csv": ["certify", "--gain", "2", "--nucl-grid", "1:1.6666666666666667:5", "--format", "csv"],
    "simulate_ff.csv": [
        "simulate", "--scheme", "feedforward", "--T", "0.5", "--optimal-gain", "--trials", "20000", "--seed", "7",
    ],
    "experiment_fixed.csv": [
        "experiment", "--mode", "fixed", "--gain-squared", "0.5", "--tgrid", "0.3,0.6,1.0",
        "--trials", "20000", "--seed", "1",
    ],
}


def run(args, tmp_path, name="out"):
    path = tmp_path / name
    code = cli.main([*args, "--out", str(path)])
    return code, path.read_text()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_files(name, tmp_path):
    _, text = run(GOLDEN_RUNS[name], tmp_path, name)
    assert text == (GOLDEN / name).read_text()


def test_tradeoff_endpoints(tmp_path):
    code, text = run(["tradeoff", "--gain", "2", "--points", "3"], tmp_path)
    assert code == 0
    pts = [(float(r["nu_cl"]), float(r["nu_out"])) for r in rows(text)]
    assert pts[0] == (1.0, 1.25)
    assert pts[-1] == pytest.approx((5 / 3, 0.75), abs=1e-11)


def test_tradeoff_optimal_and_unity_cap(tmp_path):
    _, text = run(["tradeoff", "--optimal"], tmp_path)
    assert {"g_or_optimal": "optimal", "nu_cl": "2", "nu_out": "0.5"} in rows(text)
    _, text = run(["tradeoff", "--gain", "1"], tmp_path)
    assert float(rows(text)[-1]["nu_cl"]) == 10.0


@pytest.mark.parametrize("args", [["tradeoff"], ["tradeoff", "--gain", "-1"], ["tradeoff", "--gain", "0"]])
def test_tradeoff_errors(args, capsys):
    assert cli.main(args) != 0
    assert "error" in capsys.readouterr().err


def test_window_rows(tmp_path):
    _, text = run(["window", "--gain-squared", "0.5", "0.8", "1.0"], tmp_path)
    r = rows(text)
    assert [r[0][k] for k in cli.WINDOW_COLUMNS] == ["0.5", "1", "3", "1", "3"]
    assert [r[1][k] for k in cli.WINDOW_COLUMNS] == ["0.8", "1", "9", "0.25", "2.25"]
    assert r[2]["nu_cl_max"] == ""
    _, text = run(["window", "--gain-squared", "1", "--format", "json"], tmp_path)
    assert json.loads(text)[0]["nu_cl_max"] == "inf"


def test_certify_valid_and_rejected(tmp_path):
    code, text = run(["certify", "--gain", "2", "--nucl", "1.2"], tmp_path)
    assert code == 0
    (rec,) = json.loads(text)
    assert rec["valid"] is True and rec["proof2"]["ok"] is True
    for key in ("g", "nu_cl", "a", "b", "min_eig_Z", "slackness_norm", "duality_gap", "valid"):
        assert key in rec
    code, text = run(["certify", "--gain", "2", "--nucl", "1.2", "--nucl", "2"], tmp_path)
    assert code == 1
    assert json.loads(text)[1]["status"] == "rejected"


def test_certify_unity_gain_grid(tmp_path):
    code, text = run(["certify", "--gain", "1", "--nucl-grid", "1:10:7"], tmp_path)
    assert code == 0
    assert all(r["valid"] for r in json.loads(text))


def test_certify_bad_grid(capsys):
    assert cli.main(["certify", "--gain", "2", "--nucl-grid", "1:2"]) == 2


def test_simulate_byte_identical(tmp_path):
    args = ["simulate", "--scheme", "feedforward", "--T", "0.5", "--optimal-gain", "--seed", "7", "--trials", "100000"]
    _, a = run(args, tmp_path, "a.csv")
    _, b = run(args, tmp_path, "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.splitlines()[0].split(",")[:16] == list(cli.mc.CSV_COLUMNS[:16])


def test_simulate_teleportation_targets(tmp_path):
    _, text = run(["simulate", "--scheme", "teleportation", "--r", "0", "--g", "1", "--trials", "200000"], tmp_path)
    (r,) = rows(text)
    assert abs(float(r["nu_out_hat"]) - 2) < 5 * float(r["nu_out_se"])
    assert abs(float(r["nu_cl_hat"]) - 1) < 5 * float(r["nu_cl_se"])


def test_simulate_lossy_corrected(tmp_path):
    _, text = run(
        ["simulate", "--scheme", "feedforward", "--T", "0.5", "--optimal-gain", "--eta", "0.83", "--trials", "200000"],
        tmp_path,
    )
    (r,) = rows(text)
    assert abs(float(r["nu_out_hat"]) - 1 / 3) < 5 * float(r["nu_out_se"])


def test_seed_env_and_flag_precedence(tmp_path, monkeypatch):
    base = ["simulate", "--scheme", "teleportation", "--r", "0.2", "--g", "1.5", "--trials", "20000"]
    monkeypatch.setenv(cli.SEED_ENV, "5")
    _, env_text = run(base, tmp_path)
    _, flag_text = run([*base, "--seed", "5"], tmp_path)
    _, other = run([*base, "--seed", "6"], tmp_path)
    assert env_text == flag_text != other
    monkeypatch.setenv(cli.SEED_ENV, "9")
    _, again = run([*base, "--seed", "5"], tmp_path)
    assert again == flag_text


@pytest.mark.parametrize(
    "args",
    [
        ["simulate", "--scheme", "feedforward", "--T", "0.5"],
        ["simulate", "--scheme", "feedforward", "--T", "1.5", "--G", "0"],
        ["simulate", "--scheme", "teleportation", "--r", "-1", "--g", "1"],
        ["simulate", "--scheme", "teleportation", "--r", "0.1", "--g", "1", "--eta", "0"],
        ["experiment", "--mode", "fixed"],
    ],
)
def test_simulate_config_errors(args, capsys):
    assert cli.main(args) == 2


def test_experiment_optimal_rows(tmp_path):
    code, text = run(["experiment", "--mode", "optimal", "--trials", "100000"], tmp_path)
    assert code == 0
    out = rows(text)
    assert [float(r["T"]) for r in out] == pytest.approx([0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])
    for r in out:
        nc, no = float(r["nu_cl_hat"]), float(r["nu_out_hat"])
        se = math.hypot(nc * float(r["nu_out_se"]), no * float(r["nu_cl_se"]))
        assert abs(nc * no - 1) < 5 * se
        assert r["classification"] == "on-optimal-curve"


def test_experiment_infeasible_row(tmp_path):
    code, text = run(["experiment", "--mode", "fixed", "--gain-squared", "1.3", "--tgrid", "0.5,1.2"], tmp_path)
    assert code == 1
    assert rows(text)[1]["status"] == "infeasible"


def test_atomic_write_leaves_no_temp(tmp_path):
    run(["window", "--gain-squared", "2"], tmp_path, "w.csv")
    assert [p.name for p in tmp_path.iterdir()] == ["w.csv"]


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "gaussmdm", "window", "--gain-squared", "0.5"], capture_output=True, text=True
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "0.5,1,3,1,3"
