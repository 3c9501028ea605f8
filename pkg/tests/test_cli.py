"""CLI contract: subcommands, exit codes, report schema, reproducibility,
CSV emission."""

import json
import subprocess
import sys

import numpy as np
import pytest

from bundlelift.cli import (SCENARIOS, ScenarioConfig, emit_plot_data,
                            run_scenario)
from bundlelift.errors import ConfigInvalid, UnknownScenario


FAST = {"samples": 10, "transport_steps": 64, "mesh_level": 3}


def _run(*args):
    return subprocess.run([sys.executable, "-m", "bundlelift", *args],
                          capture_output=True, text=True)


def test_list_names_all_scenarios():
    out = _run("list")
    assert out.returncode == 0
    names = out.stdout.split()
    assert names == sorted(SCENARIOS)


def test_report_schema_subcommand():
    out = _run("report-schema")
    assert out.returncode == 0
    schema = json.loads(out.stdout)
    assert schema["schema"] == "1"
    assert "checks" in schema["fields"]


def test_unknown_scenario_exits_2():
    out = _run("scenario", "no_such_thing")
    assert out.returncode == 2
    assert "unknown scenario" in out.stderr.lower()


def test_unknown_flag_exits_2():
    out = _run("scenario", "gluing_demo", "--bogus-flag")
    assert out.returncode == 2


def test_invalid_config_rejected():
    with pytest.raises(ConfigInvalid):
        ScenarioConfig(scenario="gluing_demo", samples=0).validate()
    with pytest.raises(ConfigInvalid):
        ScenarioConfig(scenario="gluing_demo", transport_steps=2).validate()
    with pytest.raises(UnknownScenario):
        ScenarioConfig(scenario="nope").validate()


def test_scenario_report_structure(tmp_path):
    path = tmp_path / "report.json"
    out = _run("scenario", "grassmann_action", "--samples", "10",
               "--no-timestamp", "--json", str(path))
    assert out.returncode == 0
    report = json.loads(path.read_text())
    assert report["schema"] == "1"
    assert report["scenario"] == "grassmann_action"
    assert report["overall"] is True
    assert report["wall_time"] is None and report["timestamp"] is None
    assert report["config"]["samples"] == 10
    for check in report["checks"]:
        assert set(check) == {"name", "residual", "tolerance", "comparator",
                              "verdict"}
    assert len(report["checks"]) >= 4


def test_exit_code_1_on_verdict_failure(tmp_path):
    # an absurdly tight exact tolerance makes formula checks fail
    out = _run("scenario", "grassmann_action", "--samples", "5",
               "--tol-exact", "1e-17", "--no-timestamp")
    assert out.returncode == 1


def test_reports_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        out = _run("scenario", "cpn_conjugation", "--samples", "8",
                   "--steps", "64", "--mesh", "3", "--no-timestamp",
                   "--json", str(p))
        assert out.returncode == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_plaquette_csv_sums_to_chern(tmp_path):
    path = tmp_path / "phases.csv"
    out = _run("scenario", "cpn_conjugation", "--samples", "5", "--steps",
               "64", "--mesh", "4", "--no-timestamp", "--csv", str(path))
    assert out.returncode == 0
    rows = path.read_text().strip().split("\n")
    assert rows[0] == "triangle_index,phase"
    total = sum(float(r.split(",")[1]) for r in rows[1:])
    assert round(total / (2 * np.pi)) == -1


def test_torus_sweep_csv_verdict_columns(tmp_path):
    path = tmp_path / "sweep.csv"
    out = _run("scenario", "torus_sweep", "--samples", "5", "--steps", "64",
               "--no-timestamp", "--csv", str(path))
    assert out.returncode == 0
    rows = [r.split(",") for r in path.read_text().strip().split("\n")]
    assert rows[0] == ["n", "b", "case", "fast_verdict", "oracle_verdict"]
    assert len(rows) == 1 + 220
    assert all(r[3] == r[4] for r in rows[1:])


def test_empty_table_gives_header_only_csv(tmp_path):
    path = tmp_path / "empty.csv"
    emit_plot_data({"name": "t", "header": ["a", "b"], "rows": []}, str(path))
    assert path.read_text() == "a,b\n"


def test_checks_table_fallback_csv(tmp_path):
    path = tmp_path / "checks.csv"
    out = _run("scenario", "gluing_demo", "--no-timestamp", "--csv", str(path))
    assert out.returncode == 0
    rows = path.read_text().strip().split("\n")
    assert rows[0] == "name,residual,tolerance,comparator,verdict"
    assert len(rows) >= 4


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_every_scenario_passes_fast_config(name):
    cfg = ScenarioConfig(scenario=name, no_timestamp=True, **FAST)
    report, _ = run_scenario(cfg)
    failed = [c["name"] for c in report["checks"] if not c["verdict"]]
    assert report["overall"], failed


def test_thread_cap_env_var_accepted():
    import os
    import subprocess

    env = dict(os.environ, BUNDLELIFT_THREADS="1")
    out = subprocess.run([sys.executable, "-m", "bundlelift", "scenario",
                          "gluing_demo", "--no-timestamp"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0
