import json
import math

import pytest

from arcgap.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_det_both_paths(capsys):
    code, out, _ = run_cli(capsys, "det", "--m", "5", "--N", "23", "--epsilon", "0.5",
                           "--method", "both")
    assert code == 0
    assert "direct" in out and "factorized" in out
    diff_line = [l for l in out.splitlines() if l.startswith("difference")][0]
    assert abs(float(diff_line.split("=")[1])) < 1e-9


def _ln_d_value(out, label):
    line = [l for l in out.splitlines() if l.startswith("ln D") and label in l][0]
    return float(line.rsplit("=", 1)[1].split("[")[0])


def test_det_degenerate_case(capsys):
    code, out, _ = run_cli(capsys, "det", "--m", "7", "--N", "4", "--epsilon", "0.4")
    assert code == 0
    expected = 4 * math.log(0.4)
    assert _ln_d_value(out, "direct") == pytest.approx(expected, abs=1e-12)
    assert _ln_d_value(out, "factorized") == pytest.approx(expected, abs=1e-12)


def test_det_single_size(capsys):
    code, out, _ = run_cli(capsys, "det", "--m", "1", "--N", "1", "--epsilon", "0.5",
                           "--method", "direct")
    assert code == 0
    assert _ln_d_value(out, "direct") == pytest.approx(math.log(0.5), abs=1e-14)


def test_asym_prints_each_term(capsys):
    code, out, _ = run_cli(capsys, "asym", "--m", "5", "--N", "97", "--epsilon", "0.5",
                           "--order", "4")
    assert code == 0
    for label in ("n1^2", "n1^1", "n1^0", "n1^-1", "n1^-2", "n1^-3", "n1^-4", "ln n1"):
        assert f"term {label:>7}" in out or label in out
    assert "truncated expansion" in out


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["det", "--m", "5"])  # missing required flags
    assert exc.value.code == 1
    code, _, err = run_cli(capsys, "residual")  # no --figure2, no grid flags
    assert code == 1
    assert "required" in err
    code, _, err = run_cli(capsys, "det", "--m", "0", "--N", "3", "--epsilon", "0.5")
    assert code == 1  # invalid m surfaces as usage error


def test_numerical_failure_exit_2(capsys):
    code, _, err = run_cli(capsys, "det", "--m", "1", "--N", "80", "--epsilon", "0.1",
                           "--max-bits", "106")
    assert code == 2
    assert "precision" in err.lower() or "numerical" in err.lower()


def test_residual_figure_preset(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ARCGAP_OUT_DIR", str(tmp_path))
    code, out, _ = run_cli(capsys, "residual", "--figure2", "--out", "fig2.csv")
    assert code == 0
    text = (tmp_path / "fig2.csv").read_text()
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    assert any("subcommand=residual" in l for l in meta)
    assert any("figure2=True" in l for l in meta)
    assert any("resolved_sign=plus" in l for l in meta)
    header = [l for l in lines if not l.startswith("#")][0]
    assert header.startswith("m,N,n1,n2,epsilon")
    rows = [l for l in lines if not l.startswith("#")][1:]
    assert len(rows) == 11 * 11  # 11 epsilon values x N in [90, 100]


def test_residual_custom_grid_json_and_plots(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ARCGAP_OUT_DIR", str(tmp_path))
    code, out, _ = run_cli(
        capsys, "residual", "--m", "3", "--eps-grid", "0.3,0.4",
        "--N-range", "60:66", "--out", "scan.json", "--format", "json",
        "--plot-data", str(tmp_path / "plots"),
    )
    assert code == 0
    payload = json.loads((tmp_path / "scan.json").read_text())
    assert len(payload["records"]) == 2 * 7
    assert payload["metadata"]["m"] == 3
    assert (tmp_path / "plots" / "scaled_residuals_n2_0.dat").exists()
    assert (tmp_path / "plots" / "free_energy_3_curve.dat").exists()


def test_fit_command(capsys):
    code, out, _ = run_cli(capsys, "fit", "--g", "3", "--epsilon", "0.4",
                           "--n-window", "40:120")
    assert code == 0
    assert "F^(3)(0.4)" in out
    line = [l for l in out.splitlines() if "fit - closed" in l][0]
    gap = float(line.rsplit("=", 1)[1].rstrip(" )"))
    assert abs(gap) < 1e-6


def test_mc_command(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ARCGAP_OUT_DIR", str(tmp_path))
    code, out, _ = run_cli(capsys, "mc", "--N", "3", "--m", "2", "--epsilon", "0.8",
                           "--samples", "4000", "--seed", "5", "--out", "mc.csv")
    assert code == 0
    assert "estimate" in out and "exact" in out
    text = (tmp_path / "mc.csv").read_text()
    header = [l for l in text.splitlines() if not l.startswith("#")][0]
    assert header == "N,m,epsilon,estimate,stderr,samples,seed,exact_logdet"


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_selftest_suites_pass(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    assert "all suites passed" in out
    for name in ("oracle-equivalence", "factorization-identity", "degenerate-case",
                 "sign-resolution", "series-reexpansion", "sampler-moments",
                 "mc-agreement"):
        assert name in out
