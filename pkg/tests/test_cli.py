import json
import math
import subprocess
import sys

import pytest

from se2track.cli import main

ELLIPSE_ARGS = ["--a", "1", "--b", "1", "--h", "1"]
QUICK = ["--dt", "0.01", "--t-end", "2"]


def run_ok(argv):
    rc = main(argv)
    assert rc == 0, argv
    return rc


def test_missing_required_out_is_usage_error(capsys):
    assert main(["simulate"] + ELLIPSE_ARGS) == 2
    assert "--out" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["simulate", "--nope", "--out", "x.csv"]) == 2


def test_no_command_is_usage_error():
    assert main([]) == 2


def test_bad_controller_choice(capsys):
    assert main(["simulate", "--controller", "pid", "--out", "x.csv"]) == 2


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "se2track" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "se2track.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "se2track" in proc.stdout


def test_malformed_offset_and_gains(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert main(["simulate", "--offset", "1,2", "--out", out] + QUICK) == 2
    assert "offset" in capsys.readouterr().err
    assert main(["simulate", "--gains", "a,b", "--out", out] + QUICK) == 2
    assert "gains" in capsys.readouterr().err


def test_degenerate_ellipse_flags(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert main(["simulate", "--a", "0", "--out", out] + QUICK) == 2
    assert main(["simulate", "--h", "0", "--out", out] + QUICK) == 2


def test_simulate_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "run.csv"
    run_ok(["simulate"] + ELLIPSE_ARGS + QUICK
           + ["--offset", "0.5,0,0.3", "--out", str(out)])
    stdout = capsys.readouterr().out
    assert "final position error" in stdout

    text = out.read_text()
    assert text.splitlines()[0].startswith("t,theta,px,py")
    assert len(text.splitlines()) == 1 + 201  # header + rows

    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["tool"] == "se2track"
    assert manifest["command"] == "simulate"
    assert manifest["rows"] == 201
    assert manifest["config"]["trajectory"]["family"] == "ellipse"
    assert manifest["config"]["offset"] == [0.5, 0.0, 0.3]
    assert manifest["config"]["dt"] == 0.01


def test_manifest_rerun_reproduces_csv_bytes(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    run_ok(["simulate"] + ELLIPSE_ARGS + QUICK
           + ["--offset", "0.5,0,0.3", "--out", str(out1)])
    manifest = tmp_path / "a.manifest.json"
    run_ok(["simulate", "--config", str(manifest), "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()
    m1 = json.loads(manifest.read_text())
    m2 = json.loads((tmp_path / "b.manifest.json").read_text())
    assert m1["config"] == m2["config"]


def test_explicit_flags_override_config(tmp_path):
    out1 = tmp_path / "a.csv"
    run_ok(["simulate"] + ELLIPSE_ARGS + QUICK + ["--out", str(out1)])
    out2 = tmp_path / "b.csv"
    run_ok(["simulate", "--config", str(tmp_path / "a.manifest.json"),
            "--t-end", "1", "--out", str(out2)])
    m2 = json.loads((tmp_path / "b.manifest.json").read_text())
    assert m2["config"]["t_end"] == 1.0
    assert m2["config"]["dt"] == 0.01  # untouched values come from the file
    assert m2["rows"] == 101


def test_missing_config_file(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "none.json"),
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert "not found" in capsys.readouterr().err


def test_divergent_run_exits_one(tmp_path, capsys):
    out = tmp_path / "x.csv"
    rc = main(["simulate"] + ELLIPSE_ARGS
              + ["--offset", "3,-2,1.5", "--dt", "100", "--t-end", "10000",
                 "--out", str(out)])
    assert rc == 1
    assert "simulation failed" in capsys.readouterr().err
    assert not out.exists()


def test_pe_check_stationary_reports_not_pe(tmp_path, capsys):
    out = tmp_path / "pe.json"
    run_ok(["pe-check", "--traj", "line", "--speed", "0", "--window", "2",
            "--horizon", "6", "--windows", "4", "--points", "51",
            "--out", str(out)])
    assert "not PE" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "not PE on scanned horizon"
    assert not doc["report"]["certifies_pe"]


def test_pe_check_ellipse_reports_closed_form(tmp_path, capsys):
    out = tmp_path / "pe.json"
    run_ok(["pe-check", "--a", "3", "--b", "5", "--h", str(2 * math.pi / 5),
            "--windows", "4", "--points", "201", "--out", str(out)])
    stdout = capsys.readouterr().out
    assert "PE certified" in stdout
    doc = json.loads(out.read_text())
    assert doc["report"]["epsilon"] > 1.0
    diag = doc["uniform_heading_convention"]["closed_form_diag"]
    assert diag == pytest.approx([20.0, 65.0, 25.0], rel=1e-12)
    assert doc["uniform_heading_convention"]["quadrature_residual_rel"] < 1e-9


def test_pe_check_rejects_bad_quadrature_count(capsys):
    assert main(["pe-check", "--points", "400"]) == 2
    assert "odd" in capsys.readouterr().err


def test_pe_check_rejects_short_horizon(capsys):
    assert main(["pe-check", "--window", "5", "--horizon", "1"]) == 2
    assert "horizon" in capsys.readouterr().err


def test_lin_check_writes_report(tmp_path, capsys):
    out = tmp_path / "lin.json"
    run_ok(["lin-check", "--t-end", "10", "--out", str(out)])
    stdout = capsys.readouterr().out
    assert "decay rate" in stdout
    doc = json.loads(out.read_text())
    rep = doc["report"]
    assert rep["max_structure_residual"] < 1e-12
    assert rep["max_fd_residual"] < 1e-8
    assert rep["verdict"].startswith("PE")


def _compare_config(tmp_path, **overrides):
    doc = {
        "trajectory": {"family": "ellipse", "a": 1.0, "b": 1.0, "h": 1.0,
                       "origin": [0.0, 0.0]},
        "controllers": [{"name": "spatial"},
                        {"name": "kanayama", "gains": [2, 8, 4]},
                        "feedforward"],
        "offset": [0.5, 0.0, 0.3],
        "dt": 0.02,
        "t_end": 1.0,
        "threshold": 0.05,
    }
    doc.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def test_compare_writes_all_outputs(tmp_path, capsys):
    cfg = _compare_config(tmp_path)
    stem = tmp_path / "cmp"
    run_ok(["compare", "--config", str(cfg), "--out", str(stem)])
    assert "wrote 3 run CSVs" in capsys.readouterr().out

    for i, name in enumerate(("spatial", "kanayama", "feedforward")):
        assert (tmp_path / f"cmp_{i}_{name}.csv").exists()
    long_lines = (tmp_path / "cmp_long.csv").read_text().splitlines()
    assert long_lines[0] == "controller,run,t,variable,value"
    assert len(long_lines) == 1 + 3 * 7 * 51  # runs x variables x rows

    summary = json.loads((tmp_path / "cmp_summary.json").read_text())
    assert summary["threshold"] == 0.05
    assert [r["controller"] for r in summary["rows"]] == [
        "spatial", "kanayama", "feedforward"]
    assert len(summary["csv_files"]) == 3


def test_compare_outputs_are_deterministic(tmp_path):
    cfg = _compare_config(tmp_path)
    stem = tmp_path / "cmp"
    run_ok(["compare", "--config", str(cfg), "--out", str(stem)])
    files = sorted(tmp_path.glob("cmp*"))
    first = {f.name: f.read_bytes() for f in files}
    run_ok(["compare", "--config", str(cfg), "--out", str(stem)])
    assert {f.name: f.read_bytes() for f in sorted(tmp_path.glob("cmp*"))} == first


def test_compare_rejects_empty_and_unknown_controllers(tmp_path, capsys):
    cfg = _compare_config(tmp_path, controllers=[])
    assert main(["compare", "--config", str(cfg)]) == 2
    assert "controllers" in capsys.readouterr().err

    cfg = _compare_config(tmp_path, controllers=[{"name": "pid"}])
    assert main(["compare", "--config", str(cfg)]) == 2
    assert "controllers[0]" in capsys.readouterr().err


def test_compare_rejects_missing_keys(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"trajectory": {"family": "line"}}))
    assert main(["compare", "--config", str(path)]) == 2
    assert "missing keys" in capsys.readouterr().err


def test_compare_rejects_invalid_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["compare", "--config", str(path)]) == 2
    assert "JSON" in capsys.readouterr().err


def test_basin_zero_samples_uses_sweep_defaults(tmp_path, capsys):
    out = tmp_path / "basin.json"
    run_ok(["basin"] + ELLIPSE_ARGS + ["--samples", "0", "--out", str(out)])
    assert "0/0" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    # without explicit flags the sweep runs longer and coarser than a
    # single simulation would
    assert doc["config"]["t_end"] == 60.0
    assert doc["config"]["dt"] == 5e-3
    assert doc["summary"]["fraction"] is None


def test_basin_small_sweep_is_seeded(tmp_path, capsys):
    out1 = tmp_path / "b1.json"
    out2 = tmp_path / "b2.json"
    args = ["basin"] + ELLIPSE_ARGS + [
        "--samples", "2", "--threshold", "1e-2", "--t-end", "5",
        "--dt", "0.01", "--seed", "2"]
    run_ok(args + ["--out", str(out1)])
    run_ok(args + ["--out", str(out2)])
    d1 = json.loads(out1.read_text())
    d2 = json.loads(out2.read_text())
    assert d1["summary"]["final_lyapunov"] == d2["summary"]["final_lyapunov"]
    assert d1["summary"]["samples"] == 2
    assert d1["config"]["t_end"] == 5.0
