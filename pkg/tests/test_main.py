#!/usr/bin/env python3
"""Tests for the lambda-madelung command line: artifacts and exit codes."""

import csv
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

import main as cli
from tools.scenario import OUTPUT_DIR_ENV


def _read_observables(path: Path):
    with open(path, newline="") as f:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]


def _scenario(tmp_path: Path, name: str = "scenario.json", **changes) -> Path:
    doc = {
        "grid": {"dims": [{"x_min": -10.0, "x_max": 10.0, "n_points": 128}]},
        "dofs": [{"mass": 1.0, "lambda": 1.0}],
        "potential": {"kind": "free"},
        "initial": {"kind": "gaussian", "center": 0.0, "sigma": 1.0, "p0": 0.5},
        "integrator": {"dt": 1e-3, "n_steps": 20, "report_every": 10},
        "outputs": {"dir": str(tmp_path / "out")},
    }
    doc.update(changes)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def run_cli(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    app_config = str(tmp_path / "no-app-config.yaml")

    def invoke(*args):
        return cli.main(["--app-config", app_config, *map(str, args)])

    return invoke


def test_run_writes_observables_and_manifest(tmp_path, run_cli):
    assert run_cli("run", _scenario(tmp_path)) == cli.EXIT_OK

    rows = _read_observables(tmp_path / "out" / "observables.csv")
    assert [row["t"] for row in rows] == pytest.approx([0.0, 0.01, 0.02])
    assert rows[0]["uncertainty_0"] == pytest.approx(0.5, abs=1e-6)

    manifest = json.loads((tmp_path / "out" / "run.json").read_text())
    assert manifest["manifest"]["command"] == "run"
    assert manifest["manifest"]["reports"] == 3
    assert manifest["dofs"] == [{"mass": 1.0, "lambda": 1.0}]


def test_rerunning_manifest_reproduces_observables(tmp_path, run_cli, monkeypatch):
    assert run_cli("run", _scenario(tmp_path)) == cli.EXIT_OK

    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "again"))
    assert run_cli("run", tmp_path / "out" / "run.json") == cli.EXIT_OK

    first = (tmp_path / "out" / "observables.csv").read_bytes()
    second = (tmp_path / "again" / "observables.csv").read_bytes()
    assert first == second


def test_run_writes_snapshots_at_requested_cadence(tmp_path, run_cli):
    path = _scenario(
        tmp_path,
        integrator={"dt": 1e-3, "n_steps": 20, "report_every": 5},
        outputs={"dir": str(tmp_path / "out"), "write_snapshots": True, "snapshot_every": 10},
    )

    assert run_cli("run", path) == cli.EXIT_OK

    sidecars = sorted(p.name for p in (tmp_path / "out").glob("snapshot_*.json"))
    assert sidecars == ["snapshot_000000.json", "snapshot_000010.json", "snapshot_000020.json"]
    assert (tmp_path / "out" / "rho_000010.f64").stat().st_size == 128 * 8


def test_unknown_key_is_a_usage_error(tmp_path, run_cli):
    path = _scenario(tmp_path, dofs=[{"mass": 1.0, "lamda": 1.0}])

    assert run_cli("run", path) == cli.EXIT_USAGE


def test_missing_config_is_a_usage_error(tmp_path, run_cli):
    assert run_cli("run", tmp_path / "nope.json") == cli.EXIT_USAGE


def test_stability_violation_is_a_numerical_failure(tmp_path, run_cli):
    path = _scenario(tmp_path, integrator={"dt": 0.1, "n_steps": 5, "report_every": 1})

    assert run_cli("run", path) == cli.EXIT_NUMERICS


def test_unwritable_output_is_an_io_failure(tmp_path, run_cli):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    path = _scenario(tmp_path, outputs={"dir": str(blocker / "out")})

    assert run_cli("run", path) == cli.EXIT_IO


def test_compare_oracle_passes_and_writes_report(tmp_path, run_cli):
    assert run_cli("compare-oracle", _scenario(tmp_path)) == cli.EXIT_OK

    report = json.loads((tmp_path / "out" / "compare.json").read_text())
    assert report["t_samples"] == pytest.approx([0.0, 0.01, 0.02])
    assert report["linf_rho"][0] == pytest.approx(0.0, abs=1e-15)
    assert max(report["linf_rho"]) <= 1e-3
    assert len(report["l2_rho"]) == 3
    assert report["passed"] is True


def test_compare_oracle_with_unattainable_threshold_fails(tmp_path, run_cli):
    assert run_cli("compare-oracle", _scenario(tmp_path), "--threshold", 1e-12) == cli.EXIT_VERIFICATION


def test_compare_oracle_rejects_hybrid_lambda(tmp_path, run_cli):
    path = _scenario(
        tmp_path,
        grid={"dims": [{"x_min": -8.0, "x_max": 8.0, "n_points": 32}] * 2},
        dofs=[{"mass": 1.0, "lambda": 1.0}, {"mass": 1.0, "lambda": 0.0}],
        initial={"kind": "gaussian", "center": [0.0, 0.0], "sigma": 1.0},
    )

    assert run_cli("compare-oracle", path) == cli.EXIT_USAGE


def test_check_family_passes(run_cli, capsys):
    assert run_cli("check", "--family", 0.25, 0, 0) == cli.EXIT_OK

    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "pass"
    assert report["model"] == {"kind": "family", "a": 0.25, "b": 0.0, "c": 0.0}


def test_check_counterexample_fails(run_cli, capsys):
    assert run_cli("check", "--custom", "eta") == cli.EXIT_VERIFICATION
    assert json.loads(capsys.readouterr().out)["verdict"] == "fail"


def test_check_argument_errors(run_cli):
    assert run_cli("check", "--family", -1, 0, 0) == cli.EXIT_USAGE
    assert run_cli("check", "--custom", "unknown_rule") == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as excinfo:
        run_cli("check")
    assert excinfo.value.code == 2


def test_sweep_without_lambdas_is_a_usage_error(tmp_path, run_cli):
    assert run_cli("sweep", _scenario(tmp_path), "-l") == cli.EXIT_USAGE


def test_sweep_single_lambda_matches_run(tmp_path, run_cli):
    path = _scenario(tmp_path)
    assert run_cli("run", path) == cli.EXIT_OK
    assert run_cli("sweep", path, "-l", 1.0) == cli.EXIT_OK

    with open(tmp_path / "out" / "observables.csv") as f:
        header, *rows = [line.rstrip("\n").split(",") for line in f]
    final = dict(zip(header, rows[-1]))
    with open(tmp_path / "out" / "sweep.csv") as f:
        sweep_header, sweep_line = [line.rstrip("\n").split(",") for line in f]
    swept = dict(zip(sweep_header, sweep_line))

    for key in ("delta_x_0", "delta_p_0", "uncertainty_0", "energy"):
        assert swept[key] == final[key]
    assert swept["error"] == ""


def test_sweep_is_ordered_and_independent_of_workers(tmp_path, run_cli):
    path = _scenario(tmp_path, initial={"kind": "gaussian", "center": 0.0, "sigma": 1.0, "p0": 0.0})

    assert run_cli("sweep", path, "-l", 1, 0, 0.5, "-w", 1) == cli.EXIT_OK
    serial = (tmp_path / "out" / "sweep.csv").read_bytes()
    assert run_cli("sweep", path, "-l", 0.5, 1, 0, "-w", 3) == cli.EXIT_OK
    concurrent = (tmp_path / "out" / "sweep.csv").read_bytes()

    assert serial == concurrent
    rows = [line.split(",") for line in serial.decode().splitlines()[1:]]
    assert [float(r[0]) for r in rows] == [0.0, 0.5, 1.0]
    spreads = [float(r[1]) for r in rows]
    assert spreads[0] < spreads[1] < spreads[2]
    assert spreads[0] == pytest.approx(1.0, abs=1e-10)


def test_sweep_records_per_lambda_failures(tmp_path, run_cli):
    # the stability guard tightens with lambda, so only the largest value fails
    path = _scenario(tmp_path, integrator={"dt": 9e-3, "n_steps": 4, "report_every": 2})

    assert run_cli("sweep", path, "-l", 0, 8) == cli.EXIT_NUMERICS

    rows = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[1:]
    assert rows[0].endswith(",")
    assert "stability guard" in rows[1]
