import json

import numpy as np
import pytest

from hoeffding_lab.cli import main

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------- kernel ----------

def test_kernel_csv_corners(capsys):
    code, out, _ = _run(capsys, ["kernel", "--dist", "uniform:a=0,b=1",
                                 "--grid", "0,1,3"])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "x,y,value"
    assert len(lines) == 10
    cells = {tuple(l.split(",")[:2]): float(l.split(",")[2]) for l in lines[1:]}
    assert cells[("0", "0")] == 0.0
    assert cells[("1", "1")] == 0.0
    assert abs(cells[("0.5", "0.5")] - 0.25) < 1e-15
    assert abs(cells[("0.5", "1")]) < 1e-15


def test_kernel_json_schema(capsys):
    code, out, _ = _run(capsys, ["kernel", "--dist", "uniform:a=0,b=1",
                                 "--grid", "0,1,2", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "hoeffding-lab/1"
    assert doc["kind"] == "kernel"
    assert doc["distribution"] == "uniform:a=0,b=1"
    assert len(doc["rows"]) == 4


# ---------- marginal and stein ----------

def test_marginal_triples(capsys):
    code, out, _ = _run(capsys, ["marginal", "--dist", "uniform:a=0,b=1",
                                 "--grid", "0,1,5"])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "x,h,tau"
    mid = dict(zip(["x", "h", "tau"], lines[3].split(",")))
    assert float(mid["x"]) == 0.5
    assert abs(float(mid["h"]) - 0.125) < 1e-12
    assert abs(float(mid["tau"]) - 0.125) < 1e-12


def test_marginal_atomic_has_blank_tau(capsys):
    code, out, _ = _run(capsys, ["marginal", "--dist", "bernoulli:p=0.3,b=0.5",
                                 "--grid", "0.1,0.4,3", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "marginal"
    for row in doc["rows"]:
        assert row["tau"] == ""
        # flat between the atoms at 0 and 0.5: 0.21 * interval width
        assert abs(row["h"] - 0.3 * 0.7 * 0.5) < 1e-12


def test_stein_meta_diagnostics(capsys):
    code, out, _ = _run(capsys, ["stein", "--dist", "gaussian:mu=0,sigma=1",
                                 "--grid", "-2,2,5", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["tv_bound"] - 4.0) < 1e-9
    assert doc["characterization_residual"] < 1e-8
    for row in doc["rows"]:
        assert abs(row["tau"] - 1.0) < 1e-8


# ---------- spectrum ----------

def test_spectrum_json_layout(capsys):
    code, out, _ = _run(capsys, ["spectrum", "--dist", "uniform:a=0,b=1",
                                 "--nodes", "300", "--terms", "5",
                                 "--format", "json", "--seed", "1"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "spectrum"
    assert len(doc["alphas"]) == 5
    assert abs(doc["alphas"][0] - 1 / np.pi ** 2) < 1e-3
    assert len(doc["nodes"]) == 300
    assert abs(doc["trace_lhs"] - 1 / 6) < 1e-6
    assert abs(doc["trace_rhs"] - 1 / 6) < 1e-9
    assert abs(doc["trace_mc"] - 1 / 6) < 4 * doc["trace_mc_stderr"]
    assert doc["seed"] == 1


def test_spectrum_csv_eigenfunction_table(capsys):
    code, out, _ = _run(capsys, ["spectrum", "--dist", "uniform:a=0,b=1",
                                 "--nodes", "200", "--terms", "3"])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "x,f1,f2,f3"
    assert len(lines) == 201


# ---------- mixing ----------

def test_mixing_requires_c(capsys):
    code, _, err = _run(capsys, ["mixing", "--dist", "uniform:a=0,b=1"])
    assert code == 1
    assert "--c" in err


def test_mixing_density_grid(capsys):
    code, out, _ = _run(capsys, ["mixing", "--dist", "uniform:a=0,b=1",
                                 "--c", "0.041666666666666664",
                                 "--grid", "0,1,5", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "mixing"
    assert abs(doc["c"] - 1 / 24) < 1e-15
    by_xy = {(row["x"], row["y"]): row["value"] for row in doc["rows"]}
    assert abs(by_xy[(0.5, 0.5)] - 0.125) < 1e-9
    assert abs(by_xy[(0.25, 0.75)] - 0.0) < 1e-9
    assert abs(by_xy[(0.25, 0.5)] - by_xy[(0.5, 0.25)]) < 1e-12


def test_mixing_rejects_unbounded_support(capsys):
    code, _, err = _run(capsys, ["mixing", "--dist", "gaussian:mu=0,sigma=1",
                                 "--c", "0.1"])
    assert code == 1
    assert "error" in err


# ---------- verify ----------

def test_verify_mixing_mode(capsys):
    code, out, _ = _run(capsys, ["verify", "--dist", "uniform:a=0,b=1",
                                 "--c", "0.041666666666666664", "--kmax", "2",
                                 "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "verify-mixing"
    assert len(doc["rows"]) == 10    # 4 periodic functions, unordered pairs
    for row in doc["rows"]:
        assert set(row) == {"u", "v", "lhs", "rhs", "residual"}
        assert row["residual"] < 1e-7


def test_verify_mixing_breach_exits_2(capsys):
    code, _, _ = _run(capsys, ["verify", "--dist", "uniform:a=0,b=1",
                               "--c", "0.041666666666666664", "--kmax", "1",
                               "--tol", "1e-18"])
    assert code == 2


def test_verify_oracle_mode_columns_and_determinism(capsys):
    argv = ["verify", "--dist", "bernoulli:p=0.3,a=0,b=1", "--samples", "20000",
            "--format", "json"]
    code, out1, _ = _run(capsys, argv)
    assert code == 0
    doc = json.loads(out1)
    assert doc["kind"] == "verify-oracle"
    assert doc["seed"] == 0
    row = doc["rows"][0]
    assert list(row) == ["distribution", "u", "v", "direct", "kernel", "mc",
                         "stderr", "residual_kernel", "residual_mc", "seed"]
    code, out2, _ = _run(capsys, argv)
    assert out1 == out2


def test_verify_seed_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("HOEFFDING_SEED", "42")
    code, out, _ = _run(capsys, ["verify", "--dist", "bernoulli:p=0.3,a=0,b=1",
                                 "--samples", "5000", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["seed"] == 42
    assert all(row["seed"] == 42 for row in doc["rows"])


# ---------- fourier ----------

def test_fourier_mixing_mode(capsys):
    code, out, _ = _run(capsys, ["fourier", "--dist", "uniform:a=0,b=1",
                                 "--c", "0.041666666666666664", "--kmax", "2",
                                 "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "fourier-mixing"
    assert len(doc["rows"]) == 25
    anti = next(r for r in doc["rows"] if r["k"] == 1 and r["l"] == -1)
    assert abs(anti["lambda_re"] - 1 / (4 * np.pi ** 2)) < 1e-8
    assert abs(anti["lambda_im"]) < 1e-10
    assert max(r["residual"] for r in doc["rows"]) < 1e-6


def test_fourier_kernel_mode(capsys):
    code, out, _ = _run(capsys, ["fourier", "--dist", "gaussian:mu=0,sigma=1",
                                 "--grid", "-2,2,5", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "fourier-kernel"
    assert len(doc["rows"]) == 12   # zero and anti-diagonal frequencies skipped
    assert max(r["residual"] for r in doc["rows"]) < 1e-6


# ---------- plumbing ----------

def test_usage_errors_exit_1(capsys):
    assert _run(capsys, ["kernel"])[0] == 1                       # missing --dist
    assert _run(capsys, ["kernel", "--dist", "nope:x=1"])[0] == 1  # unknown family
    assert _run(capsys, ["kernel", "--dist", "uniform:a=0,b=1",
                         "--grid", "1,0,5"])[0] == 1               # empty grid
    assert _run(capsys, ["frobnicate"])[0] == 1                    # no such command
    assert _run(capsys, [])[0] == 1


def test_output_file_and_plot(tmp_path, capsys):
    out_path = tmp_path / "kernel.csv"
    png_path = tmp_path / "kernel.png"
    code, stdout, _ = _run(capsys, ["kernel", "--dist", "uniform:a=0,b=1",
                                    "--grid", "0,1,11",
                                    "--output", str(out_path),
                                    "--plot", str(png_path)])
    assert code == 0
    assert stdout == ""
    assert out_path.read_text().startswith("x,y,value\n")
    assert png_path.read_bytes()[:8] == PNG_MAGIC


def test_marginal_plot_curve(tmp_path, capsys):
    png_path = tmp_path / "h.png"
    code, _, _ = _run(capsys, ["marginal", "--dist", "gaussian:mu=0,sigma=1",
                               "--grid", "-3,3,31", "--plot", str(png_path)])
    assert code == 0
    assert png_path.read_bytes()[:8] == PNG_MAGIC


def test_negative_grid_values_accepted(capsys):
    code, out, _ = _run(capsys, ["marginal", "--dist", "gaussian:mu=0,sigma=1",
                                 "--grid", "-2,2,5"])
    assert code == 0
    assert out.startswith("x,h,tau\n-2,")
