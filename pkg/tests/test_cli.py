import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from threaded5d import cli
from threaded5d.geodesic import CSV_HEADER, read_csv

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def _write(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def _run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_integrate_minkowski_to_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code, _, _ = _run(
        ["integrate", "--config", str(SCENARIOS / "mink.json"), "--t1", "1", "--step", "1e-3", "--out", str(out)],
        capsys,
    )
    assert code == 0
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    traj = read_csv(out)
    assert len(traj) == 1001
    np.testing.assert_allclose(traj.x, np.outer(traj.t, [1, 0.3, 0, 0, 0.2]), atol=1e-14)


def test_integrate_to_stdout_with_overrides(capsys):
    code, out, _ = _run(
        ["integrate", "--config", str(SCENARIOS / "mink.json"), "--t0", "0", "--t1", "0.01", "--step", "0.005"],
        capsys,
    )
    assert code == 0
    rows = out.splitlines()
    assert len(rows) == 4
    assert rows[-1].startswith("0.01,")


def test_kinematics_rw(capsys):
    code, out, _ = _run(["kinematics", "--config", str(SCENARIOS / "rw.json"), "--point", "2,0,0,0,3"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["Theta_trace"] == 1.5
    assert doc["K_trace"] == 1.0
    for key in ("omega", "eta", "Theta", "K", "a", "b", "c", "d", "a0", "Phi_i", "Psi_i", "Phi4", "Psi4"):
        assert key in doc


def test_connection_output_keys(capsys):
    code, out, _ = _run(["connection", "--config", str(SCENARIOS / "generic.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert list(doc["lc_table"]) == [
        "d_beta:d_alpha", "d0:d_alpha", "d4:d_alpha", "d_alpha:d0", "d_alpha:d4",
        "d4:d0", "d0:d4", "d0:d0", "d4:d4",
    ]
    assert np.array(doc["gamma_spatial"]).shape == (3, 3, 3)
    assert doc["point"] == [0.3, 0.2, -0.4, 0.5, 0.7]


def test_validate_rw_identifies_derived_variant(tmp_path, capsys):
    report = tmp_path / "report.json"
    code, out, _ = _run(["validate", "--config", str(SCENARIOS / "rw.json"), "--out", str(report)], capsys)
    assert code == 0
    assert "oracle-consistent variant(s): derived" in out
    assert "OVERALL: PASS" in out
    doc = json.loads(report.read_text())
    assert doc["passed"] is True and "derived" in doc["matching_variants"]


def test_validate_generic_rejects_as_printed(capsys):
    code, out, _ = _run(["validate", "--config", str(SCENARIOS / "generic.json"), "--t1", "0.3"], capsys)
    assert code == 0
    assert "oracle-consistent variant(s): derived\n" in out
    assert "mismatch" in out


def test_classify_exit_codes(tmp_path, capsys):
    on = tmp_path / "on.csv"
    assert cli.run(["integrate", "--config", str(SCENARIOS / "critical.json"), "--out", str(on)]) == 0
    code, out, _ = _run(["classify", "--config", str(SCENARIOS / "critical.json"), "--trajectory", str(on)], capsys)
    assert code == 0
    assert json.loads(out)["verdicts"]["spatial_geodesic"] is True

    doc = json.loads((SCENARIOS / "critical.json").read_text())
    doc["initial"]["point"] = [2.1, 0, 0, 0, 5]
    doc["t_span"] = [0, 0.1]
    off_cfg = _write(tmp_path, doc)
    off = tmp_path / "off.csv"
    assert cli.run(["integrate", "--config", off_cfg, "--out", str(off)]) == 0
    code, out, _ = _run(["classify", "--config", off_cfg, "--trajectory", str(off)], capsys)
    assert code == 1
    assert json.loads(out)["verdicts"]["spatial_geodesic"] is False


def test_classify_reports_killing_bundle_on_declared_region(tmp_path, capsys):
    traj = tmp_path / "on.csv"
    assert cli.run(["integrate", "--config", str(SCENARIOS / "critical.json"), "--out", str(traj)]) == 0
    doc = json.loads((SCENARIOS / "critical.json").read_text())
    doc["region"] = {"lo": [2, -1, -1, -1, 5], "hi": [2, 1, 1, 1, 5]}
    doc["grid"] = [1, 3, 3, 3, 1]
    code, out, _ = _run(["classify", "--config", _write(tmp_path, doc), "--trajectory", str(traj)], capsys)
    report = json.loads(out)
    assert code == 0 and report["verdicts"]["killing_bundle"] is True
    assert report["notes"]["killing_bundle_nodes"] == 27

    doc["region"] = {"lo": [1, -1, -1, -1, 4], "hi": [3, 1, 1, 1, 6]}
    doc["grid"] = [3, 2, 2, 2, 3]
    code, out, _ = _run(["classify", "--config", _write(tmp_path, doc), "--trajectory", str(traj)], capsys)
    report = json.loads(out)
    assert code == 0 and report["verdicts"]["killing_bundle"] is False
    assert report["residuals"]["killing_bundle"] > 0.1

    doc["region"] = {"lo": [3, 0, 0, 0, 5], "hi": [1, 0, 0, 0, 5]}
    code, _, err = _run(["classify", "--config", _write(tmp_path, doc), "--trajectory", str(traj)], capsys)
    assert code == 2 and "upper corner" in err


def test_classify_missing_trajectory(tmp_path, capsys):
    code, _, err = _run(
        ["classify", "--config", str(SCENARIOS / "critical.json"), "--trajectory", str(tmp_path / "none.csv")],
        capsys,
    )
    assert code == 2 and "cannot load trajectory" in err


def test_critical_points(capsys):
    code, out, _ = _run(["critical-points", "--config", str(SCENARIOS / "critical.json")], capsys)
    assert code == 0
    (point,) = json.loads(out)
    assert point["c"] == pytest.approx(2) and point["k"] == pytest.approx(5)
    assert point["residual"] <= 1e-10


def test_critical_points_needs_rw5(capsys):
    code, _, err = _run(["critical-points", "--config", str(SCENARIOS / "generic.json")], capsys)
    assert code == 2 and "rw5" in err


# --- failure exit codes ---------------------------------------------------


def test_parse_error_exit_2_with_offset(tmp_path, capsys):
    cfg = _write(tmp_path, {"metric": {"family": "rw5", "fields": {"f": "x0 * * x4"}}, "point": [1, 0, 0, 0, 1]})
    code, _, err = _run(["kinematics", "--config", cfg], capsys)
    assert code == 2
    assert "byte offset 5" in err


@pytest.mark.parametrize(
    "doc",
    [
        {"metric": {"family": "custom", "fields": {"Phi": "1"}}, "point": [0, 0, 0, 0, 0]},
        {"metric": {"family": "rw5", "fields": {"f": "x0", "g11": "x4"}}, "point": [1, 0, 0, 0, 0]},
        {"metric": {"family": "kerr"}},
        {"metric": {"family": "minkowski5"}, "unexpected": 1},
        {"metric": {"family": "minkowski5"}, "point": [0, 0]},
        {"metric": {"family": "minkowski5"}},
        {"metric": {"family": "rw5", "fields": {"f": "foo(x0)"}}, "point": [1, 0, 0, 0, 1]},
    ],
)
def test_configuration_errors_exit_2(tmp_path, capsys, doc):
    code, _, err = _run(["kinematics", "--config", _write(tmp_path, doc)], capsys)
    assert code == 2
    assert err.startswith("error:")


def test_invalid_json_and_missing_file(tmp_path, capsys):
    assert _run(["kinematics", "--config", _write(tmp_path, "{not json")], capsys)[0] == 2
    assert _run(["kinematics", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate", "--config", "x.json"],
        ["kinematics"],
        ["kinematics", "--config", "x.json", "--point", "1,2"],
        ["integrate", "--config", "x.json", "--integrator", "euler"],
    ],
)
def test_bad_arguments_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        cli.run(argv)
    assert info.value.code == 2


def test_non_positive_definite_h_exit_3(tmp_path, capsys):
    fields = {"Phi": "1", "Psi": "1", "A0": "0", "A1": "0", "A2": "0", "A3": "0", "B1": "0", "B2": "0", "B3": "0",
              "h11": "1", "h12": "1", "h13": "0", "h22": "1", "h23": "0", "h33": "1"}
    cfg = _write(tmp_path, {"metric": {"family": "custom", "fields": fields}, "point": [0, 0, 0, 0, 0]})
    code, _, err = _run(["kinematics", "--config", cfg], capsys)
    assert code == 3 and "positive definite" in err


def test_integrator_failure_exit_3(tmp_path, capsys):
    fields = {"Phi": "1 - x0", "Psi": "1", "A0": "0", "A1": "0", "A2": "0", "A3": "0", "B1": "0", "B2": "0",
              "B3": "0", "h11": "1", "h12": "0", "h13": "0", "h22": "1", "h23": "0", "h33": "1"}
    doc = {"metric": {"family": "custom", "fields": fields}, "initial": {"point": [0] * 5, "velocity": [1, 0, 0, 0, 0]},
           "t_span": [0, 2]}
    code, _, err = _run(["integrate", "--config", _write(tmp_path, doc)], capsys)
    assert code == 3
    assert "numerical failure" in err


def test_domain_error_exit_3(tmp_path, capsys):
    cfg = _write(tmp_path, {"metric": {"family": "rw5", "fields": {"f": "log(x0)"}}, "point": [0, 0, 0, 0, 1]})
    assert _run(["kinematics", "--config", cfg], capsys)[0] == 3


# --- determinism ----------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["integrate", "--config", str(SCENARIOS / "generic.json"), "--t1", "0.05"],
        ["connection", "--config", str(SCENARIOS / "generic.json")],
        ["kinematics", "--config", str(SCENARIOS / "generic.json")],
    ],
)
def test_byte_identical_outputs(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.run([*argv, "--out", str(a)]) == 0
    assert cli.run([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_floats_round_trip(capsys):
    _, out, _ = _run(["connection", "--config", str(SCENARIOS / "generic.json")], capsys)
    doc = json.loads(out)
    from threaded5d.connection import connection_sample
    from threaded5d.scenario import load_scenario

    sc = load_scenario(SCENARIOS / "generic.json")
    exact = connection_sample(sc.metric, sc.get("initial")["point"]).gamma_spatial
    assert np.array_equal(np.array(doc["gamma_spatial"]), exact)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "threaded5d", "kinematics", "--config", str(SCENARIOS / "rw.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["Theta_trace"] == 1.5
