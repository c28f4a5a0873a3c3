import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from starquant.cli import main, resolve_params, to_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_star_moyal(capsys):
    code, out, _ = run(capsys, "star", "--scheme", "moyal", "--f", "q", "--g", "p")
    assert code == 0
    assert json.loads(out)["result"] == "q*p + (i/2)*hbar"


def test_star_normal(capsys):
    code, out, _ = run(capsys, "star", "--scheme", "normal", "--f", "a", "--g", "abar")
    assert json.loads(out)["result"] == "a*abar + hbar"


def test_star_csv_terms(capsys):
    code, out, _ = run(capsys, "--format", "csv", "star", "--f", "q", "--g", "p")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {(r["i"], r["j"], r["hbar_power"], r["re"], r["im"]) for r in rows} == {("1", "1", "0", "1", "0"), ("0", "0", "1", "0", "0.5")}


def test_parse_error_exit_code(capsys):
    code, out, err = run(capsys, "star", "--f", "q+*p", "--g", "p")
    assert code == 2
    assert out == ""
    assert "position 2" in err and "^" in err


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--scheme", "moyal", "--n-max", "3")
    doc = json.loads(out)
    assert code == 0
    assert [row["energy"] for row in doc["levels"]] == [0.5, 1.5, 2.5, 3.5]
    assert all(row["residual_norm"] < 1e-12 for row in doc["levels"])
    assert set(doc["levels"][0]) == {"n", "energy", "residual_norm"}


def test_spectrum_normal(capsys):
    _, out, _ = run(capsys, "spectrum", "--scheme", "normal", "--n-max", "3")
    assert [row["energy"] for row in json.loads(out)["levels"]] == [0, 1, 2, 3]


def test_spectrum_usage_error(capsys):
    code, _, err = run(capsys, "spectrum", "--n-max", "-1")
    assert code == 2
    assert "non-negative" in err


def test_wigner_origin_value(capsys):
    code, out, _ = run(capsys, "wigner", "--n", "1", "--nq", "16", "--np", "16")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 256
    origin = [r for r in rows if float(r["q"]) == 0 and float(r["p"]) == 0]
    assert float(origin[0]["re"]) == pytest.approx(-2.0)
    assert min(float(r["re"]) for r in rows) < 0


def test_wigner_range_error(capsys):
    code, out, err = run(capsys, "wigner", "--n", "99")
    assert code == 1
    assert "out of range" in err


def test_marginal_matches_ground_state(capsys):
    code, out, _ = run(capsys, "marginal", "--n", "0", "--axis", "q")
    rows = list(csv.DictReader(io.StringIO(out)))
    x = np.array([float(r["x"]) for r in rows])
    v = np.array([float(r["value"]) for r in rows])
    assert np.max(np.abs(v - np.exp(-(x**2)) / np.sqrt(np.pi))) < 1e-6


def test_evolve_methods(capsys):
    code, out, _ = run(capsys, "--format", "json", "evolve", "--t", "0.3", "--method", "ode")
    doc = json.loads(out)
    assert code == 0
    assert doc["max_rel_err_vs_closed"] < 1e-6
    code, out, _ = run(capsys, "evolve", "--t", "0.3", "--points", "5")
    assert out.splitlines()[0] == "H,re,im"
    h0, re, im = out.splitlines()[1].split(",")
    assert (h0, im) == ("0", "0")
    assert float(re) == pytest.approx(1 / np.cos(0.15), rel=1e-15)


def test_evolve_singular(capsys):
    code, _, err = run(capsys, "evolve", "--t", "3.141592653589793")
    assert code == 1
    assert "Singularity" in err


def test_kernel_methods(capsys):
    _, out, _ = run(capsys, "kernel", "--t", "0.5", "--method", "slices", "--slices", "512")
    assert json.loads(out)["max_rel_coeff_err"] < 1e-4
    _, out, _ = run(capsys, "kernel", "--t", "0.5", "--method", "mehler")
    coeffs = json.loads(out)["coefficients"]
    assert set(coeffs) == {"A", "B", "C", "N0"}
    assert set(coeffs["A"]) == {"re", "im"}
    _, out, _ = run(capsys, "kernel", "--t", "0.5", "--method", "eigen")
    assert json.loads(out)["rel_err"] < 1e-4


def test_weyl_matrix(capsys):
    _, out, _ = run(capsys, "weyl", "--f", "a*abar", "--ordering", "normal", "--dim", "4")
    M = json.loads(out)["matrix"]
    np.testing.assert_allclose([M[n][n]["re"] for n in range(4)], [0, 1, 2, 3], atol=1e-12)


def test_bridge(capsys):
    code, out, _ = run(capsys, "bridge")
    assert code == 0
    assert json.loads(out)["max_rel_diff"] < 1e-5


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "equivalence")
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"] is True
    assert doc["suites"][0]["name"] == "equivalence"
    assert doc["suites"][0]["seconds"] > 0


def test_verify_failing_suite_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "grid-star")
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_unknown_suite(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "nonsense")
    assert code == 2


def test_environment_and_flags(capsys, monkeypatch):
    monkeypatch.setenv("DQ_HBAR", "2")
    _, out, _ = run(capsys, "spectrum", "--n-max", "1")
    assert [r["energy"] for r in json.loads(out)["levels"]] == [1, 3]
    _, out, _ = run(capsys, "spectrum", "--n-max", "1", "--hbar", "1")
    assert [r["energy"] for r in json.loads(out)["levels"]] == [0.5, 1.5]
    monkeypatch.setenv("DQ_OMEGA", "zero")
    code, _, err = run(capsys, "spectrum")
    assert code == 2 and "DQ_OMEGA" in err


def test_resolve_params_defaults():
    class Args:
        hbar = None
        mass = 3.0

    p = resolve_params(Args(), {"DQ_MASS": "5", "DQ_OMEGA": "0.5"})
    assert (p.hbar, p.mass, p.omega) == (1.0, 3.0, 0.5)


def test_invalid_flag_value(capsys):
    code, _, _ = run(capsys, "spectrum", "--hbar", "-1")
    assert code == 2


def test_deterministic_json(capsys):
    outs = [run(capsys, "projector", "--n", "3")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert list(doc) == sorted(doc)
    assert doc["normalization"]["re"] == pytest.approx(1.0)


def test_float_format():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json({"b": 1j, "a": [1.5, 2]}) == '{\n  "a": [1.5, 2],\n  "b": {\n    "im": 1,\n    "re": 0\n  }\n}'
    assert to_json(float("nan")) == "null"


def test_out_and_figure(tmp_path, capsys):
    out = tmp_path / "w.csv"
    fig = tmp_path / "w.png"
    code, stdout, _ = run(capsys, "wigner", "--n", "2", "--nq", "32", "--np", "32", "--out", str(out), "--figure", str(fig))
    assert code == 0 and stdout == ""
    assert out.read_text().startswith("q,p,re,im\n")
    assert fig.read_bytes()[:4] == b"\x89PNG"
    for cmd in (["marginal", "--n", "1", "--axis", "p"], ["evolve", "--t", "0.5", "--method", "ode"]):
        path = tmp_path / f"{cmd[0]}.png"
        assert run(capsys, *cmd, "--figure", str(path))[0] == 0
        assert path.stat().st_size > 1000


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "starquant", "star", "--f", "a", "--g", "abar", "--scheme", "normal"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"] == "a*abar + hbar"
