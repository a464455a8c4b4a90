import json

import numpy as np
import pytest

from operlax import ConfigError, gerstenhaber_bracket, make_operation, operation_from_dict
from operlax.cli import build_config, load_config, main
from operlax.evolution import CSV_HEADER


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SIM_ARGS = ["simulate", "--omega", "1", "--q0", "0", "--p0", "1",
            "--c", "0,0,0,0,1,0,0,0", "--dt", "1e-3", "--t-end", "2"]


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code, stdout, _ = run(SIM_ARGS + ["--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2002
    assert "max_err_mu_max=" in stdout and "max_energy_drift=" in stdout


def test_simulate_missing_omega_is_usage_error(tmp_path, capsys):
    argv = ["simulate", "--q0", "0", "--p0", "1", "--out", str(tmp_path / "x.csv")]
    code, _, stderr = run(argv, capsys)
    assert code == 2
    assert "usage:" in stderr and "omega" in stderr


def test_simulate_degenerate_energy(tmp_path, capsys):
    argv = ["simulate", "--omega", "1", "--q0", "0", "--p0", "0",
            "--out", str(tmp_path / "x.csv")]
    code, _, stderr = run(argv, capsys)
    assert code == 2
    assert "degenerate energy" in stderr


def test_simulate_bad_flag_value(capsys):
    code, _, stderr = run(["simulate", "--omega", "1", "--q0", "0", "--p0", "1",
                           "--dt", "-0.1", "--out", "x.csv"], capsys)
    assert code == 2
    assert "dt" in stderr


def test_simulate_unwritable_path(capsys):
    code, _, stderr = run(SIM_ARGS + ["--out", "/nonexistent-dir/x.csv"], capsys)
    assert code == 1
    assert "error" in stderr


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--frequency", "1"])
    assert exc.value.code == 2


def test_simulate_deterministic_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(SIM_ARGS + ["--out", str(a)], capsys)[0] == 0
    assert run(SIM_ARGS + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_operad_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["verify", "operad", "--trials", "40", "--seed", "42",
                      "--tol", "1e-10", "--out", str(out)], capsys)
    assert code == 0
    report = json.loads(out.read_text())
    assert report["suite"] == "verify-operad"
    assert report["seed"] == 42
    assert report["overall_pass"] is True
    assert report["wall_time_seconds"] >= 0.0
    names = [c["law"] for c in report["checks"]]
    assert names == sorted(names)
    assert {"antisymmetry", "composition-relations", "graded-jacobi", "unit-laws"} == set(names)
    for c in report["checks"]:
        assert set(c) == {"law", "trials", "max_abs_residual", "pass", "seed"}


def test_verify_identities_stdout(capsys):
    code, stdout, _ = run(["verify", "identities", "--trials", "100", "--seed", "1",
                           "--tol", "1e-12"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["overall_pass"] is True
    assert len(report["checks"]) == 6


def test_verify_theorem_small(capsys):
    code, stdout, _ = run(["verify", "theorem", "--trials", "1", "--seed", "7",
                           "--tol", "1e-6", "--t-end", "5"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["overall_pass"] is True
    assert len(report["checks"]) == 4


def test_pde_check(capsys):
    code, stdout, _ = run(["pde-check", "--trials", "20", "--seed", "3"], capsys)
    assert code == 0
    report = json.loads(stdout)
    names = [c["law"] for c in report["checks"]]
    assert names == ["pde-residual", "pde-residual-halving"]


def test_failed_check_exits_1_but_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["verify", "identities", "--trials", "50", "--seed", "1",
                      "--tol", "1e-300", "--out", str(out)], capsys)
    assert code == 1
    report = json.loads(out.read_text())
    assert report["overall_pass"] is False


def test_verify_report_determinism(tmp_path, capsys):
    reports = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        run(["verify", "operad", "--trials", "20", "--seed", "9", "--out", str(out)], capsys)
        obj = json.loads(out.read_text())
        obj.pop("wall_time_seconds")
        reports.append(json.dumps(obj, sort_keys=True))
    assert reports[0] == reports[1]


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "mode": "simulate", "omega": 1, "q0": 0, "p0": 1,
        "dt": 0.001, "t_end": 20, "c": [0, 0, 0, 0, 1, 0, 0, 0],
    }))
    cfg = load_config(str(path))
    assert cfg.mode == "simulate"
    assert cfg.dt == 0.001
    assert cfg.c == (0, 0, 0, 0, 1, 0, 0, 0)


def test_config_file_validation_names_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"mode": "simulate", "omega": 1, "q0": 0, "p0": 1,
                                "dt": -0.1, "out": "x.csv"}))
    with pytest.raises(ConfigError, match="dt"):
        load_config(str(path))


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"mode": "simulate", "omega": 1, "q0": 0, "p0": 1,
                                "dt": 1e-3, "out": "x.csv"}))
    cfg = build_config("simulate", {"dt": 5e-4}, json.loads(path.read_text()))
    assert cfg.dt == 5e-4


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "odd.json"
    path.write_text(json.dumps({"mode": "simulate", "omgea": 1}))
    with pytest.raises(ConfigError, match="omgea"):
        load_config(str(path))


def test_simulate_with_config_file(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"omega": 1, "q0": 0, "p0": 1, "dt": 1e-3,
                                "t_end": 1, "c": [0, 0, 0, 0, 1, 0, 0, 0]}))
    code, _, _ = run(["simulate", "--config", str(path), "--out", str(out)], capsys)
    assert code == 0
    assert out.read_text().splitlines()[0] == CSV_HEADER


def test_bracket_command(tmp_path, capsys):
    f = make_operation(2, 1, [0.0, 1.0, 0.0, 0.0])
    g = make_operation(2, 1, [0.0, 0.0, 1.0, 0.0])
    fp, gp = tmp_path / "f.json", tmp_path / "g.json"
    fp.write_text(json.dumps({"dim": 2, "arity": 1, "coeffs": [0.0, 1.0, 0.0, 0.0]}))
    gp.write_text(json.dumps({"dim": 2, "arity": 1, "coeffs": [0.0, 0.0, 1.0, 0.0]}))
    out = tmp_path / "out.json"
    code, _, _ = run(["bracket", str(fp), str(gp), "--out", str(out)], capsys)
    assert code == 0
    result = operation_from_dict(json.loads(out.read_text()))
    expected = gerstenhaber_bracket(f, g)
    np.testing.assert_array_equal(result.coeffs, expected.coeffs)


def test_bracket_missing_file(tmp_path, capsys):
    code, _, stderr = run(["bracket", str(tmp_path / "no.json"), str(tmp_path / "no2.json")],
                          capsys)
    assert code == 2
    assert "no.json" in stderr


def test_bracket_dim_mismatch(tmp_path, capsys):
    fp, gp = tmp_path / "f.json", tmp_path / "g.json"
    fp.write_text(json.dumps({"dim": 2, "arity": 1, "coeffs": [1.0, 0.0, 0.0, 1.0]}))
    gp.write_text(json.dumps({"dim": 3, "arity": 1, "coeffs": [0.0] * 9}))
    code, _, _ = run(["bracket", str(fp), str(gp)], capsys)
    assert code == 2
