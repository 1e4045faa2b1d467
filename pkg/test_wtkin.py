#!/usr/bin/env python3
"""
Tests for the run config and the wtkin command-line workflows
"""

import json

import pytest

from config import Config, ConfigError, RunConfig
from kinetics import __version__
from kinetics.evolve import TrajectoryRecord
from kinetics.grid import constant_spectrum, make_log_grid
from utils.artifacts import ArtifactStore
from wtkin import main


def write_config(path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


def load_report(out_dir, name):
    return json.loads((out_dir / name).read_text(encoding="utf-8"))


def passed(report, prefix):
    checks = [a for a in report["assertions"] if a["name"].startswith(prefix)]
    return bool(checks) and all(a["passed"] for a in checks)


# Run config

def test_config_defaults_are_documented():
    schema = RunConfig.schema()
    assert all(doc for _, doc in schema.values())
    cfg = RunConfig()
    assert cfg.n_nodes == 256 and cfg.seed == 20240611
    assert cfg.oracle_energies == [0.5, 1.0, 2.0]


def test_config_parses_values_lists_and_comments():
    cfg = RunConfig.from_text(
        """
        # grid
        n_nodes = 64        # coarse
        couplings = 1e-2, 1e-3
        ic_family = constant
        """
    )
    assert cfg.n_nodes == 64
    assert cfg.couplings == [1e-2, 1e-3]
    assert cfg.ic_family == "constant"


@pytest.mark.parametrize(
    "text",
    [
        "unknown_key = 1",
        "n_nodes = 8\nn_nodes = 9",
        "n_nodes 8",
        "n_nodes = 2.5",
        "eps_min = small",
        "conserve_moments = maybe",
    ],
)
def test_config_rejects_bad_text(text):
    with pytest.raises(ConfigError):
        RunConfig.from_text(text)


def test_config_text_round_trip():
    cfg = RunConfig.from_text("n_nodes = 32\nmarkov_couplings = 0.2,0.05\ntrajectory_dir = runs/x")
    assert RunConfig.from_text(cfg.to_text()).echo() == cfg.echo()


def test_config_semantic_validation():
    valid, errors = RunConfig.from_text("eps_min = 10\neps_max = 1\nn_nodes = 4").validate()
    assert not valid
    assert len(errors) == 2
    assert RunConfig().validate() == (True, [])


def test_environment_overrides_threads(monkeypatch):
    monkeypatch.setenv("WTKIN_THREADS", "3")
    assert RunConfig().apply_environment().threads == 3


def test_malformed_thread_variable_is_a_config_error(monkeypatch):
    monkeypatch.setenv("WTKIN_THREADS", "four")
    with pytest.raises(ConfigError):
        RunConfig().apply_environment()
    monkeypatch.setattr(Config, "THREADS_SETTING", "four")
    valid, errors = Config.validate()
    assert not valid
    assert "WTKIN_THREADS" in errors[0]


def test_config_booleans():
    assert RunConfig().conserve_moments is True
    cfg = RunConfig.from_text("conserve_moments = false")
    assert cfg.conserve_moments is False
    assert "conserve_moments = false" in cfg.to_text()


def test_echo_leaves_out_threads():
    cfg = RunConfig.from_text("threads = 4")
    assert cfg.threads == 4
    assert "threads" not in cfg.echo()
    assert "threads =" not in cfg.to_text()
    assert cfg.echo() == RunConfig().echo()


# Commands

def test_malformed_config_exits_1(tmp_path, out_dir):
    path = write_config(tmp_path / "bad.conf", "n_nodes = many\n")
    assert main(["evolve", "--config", path, "--out", str(out_dir)]) == 1
    invalid = write_config(tmp_path / "invalid.conf", "n_nodes = 4\n")
    assert main(["breakdown", "--config", invalid, "--out", str(out_dir)]) == 1


def test_breakdown_report(out_dir):
    assert main(["breakdown", "--out", str(out_dir)]) == 0
    report = load_report(out_dir, "breakdown_report.json")
    assert report["command"] == "breakdown"
    assert report["error"] is None
    rows = {row["coupling"]: row for row in report["results"]["rows"]}
    assert abs(rows[1e-3]["tau_star"] - 0.0122105) <= 1e-6
    assert all(row["scales_equal"] and row["hierarchy_equal"] for row in rows.values())
    assert passed(report, "tau_star_reference")
    assert report["config"] == RunConfig().echo()


def test_reports_are_reproducible(tmp_path, out_dir):
    assert main(["breakdown", "--out", str(out_dir)]) == 0
    first = load_report(out_dir, "breakdown_report.json")
    echoed = str(out_dir / "config.echo.conf")
    second_dir = tmp_path / "again"
    assert main(["breakdown", "--config", echoed, "--out", str(second_dir), "--threads", "1"]) == 0
    second = load_report(second_dir, "breakdown_report.json")
    first.pop("generated_at")
    second.pop("generated_at")
    assert first == second


def test_bad_thread_setting_exits_1(monkeypatch, out_dir):
    monkeypatch.setattr(Config, "THREADS_SETTING", "lots")
    assert main(["breakdown", "--out", str(out_dir)]) == 1
    monkeypatch.setattr(Config, "THREADS_SETTING", "1")
    monkeypatch.setenv("WTKIN_THREADS", "lots")
    assert main(["breakdown", "--out", str(out_dir)]) == 1


def test_reports_do_not_depend_on_thread_count(tmp_path, out_dir):
    path = write_config(tmp_path / "wick.conf", "wick_mc_samples = 40000\nwick_mc_max_order = 2\n")
    reports = []
    for threads in ("1", "3"):
        target = tmp_path / f"threads_{threads}"
        main(["wick-check", "--config", path, "--out", str(target), "--threads", threads])
        report = load_report(target, "wick_report.json")
        report.pop("generated_at")
        reports.append(report)
    assert reports[0] == reports[1]
    assert (tmp_path / "threads_1" / "config.echo.conf").read_text() == (
        tmp_path / "threads_3" / "config.echo.conf"
    ).read_text()


def test_wick_check_equalities(tmp_path, out_dir):
    path = write_config(tmp_path / "wick.conf", "wick_mc_samples = 5000\nwick_mc_max_order = 2\n")
    main(["wick-check", "--config", path, "--out", str(out_dir)])
    report = load_report(out_dir, "wick_report.json")
    assert passed(report, "permanent_L")
    assert passed(report, "unbalanced_L")
    assert passed(report, "pairing_count_L")
    assert len(report["results"]["orders"]) == 5
    assert len(report["results"]["order3_structure"]) == 6


def test_markov_check_limit_table(tmp_path, out_dir):
    path = write_config(
        tmp_path / "markov.conf",
        "mc_samples = 4000\noracle_energies = 1.0\noracle_nodes = 64\n",
    )
    main(["markov-check", "--config", path, "--out", str(out_dir)])
    report = load_report(out_dir, "mc_report.json")
    assert passed(report, "limit_")
    assert [row["coupling"] for row in report["results"]["markov_limit"]["table"]] == [0.3, 0.1, 0.03]
    gamma = report["results"]["gamma"]
    assert gamma["expected_factor"] == pytest.approx(256.0 * 3.141592653589793 ** 9)
    assert report["results"]["oracle"][0]["mc"]["n_samples"] == 4000


def test_nonmarkov_compare_structure(tmp_path, out_dir):
    path = write_config(tmp_path / "nm.conf", "nonmarkov_samples = 2000\ntime_quadrature_steps = 8\nn_nodes = 32\n")
    main(["nonmarkov-compare", "--config", path, "--out", str(out_dir)])
    report = load_report(out_dir, "nonmarkov_report.json")
    assert report["error"] is None
    assert [row["coupling"] for row in report["results"]["rows"]] == [0.5, 0.25]
    assert {a["name"] for a in report["assertions"]} == {"gap_decreasing", "final_gap"}


def test_evolve_equilibrium(tmp_path, out_dir):
    path = write_config(
        tmp_path / "eq.conf",
        "ic_family = constant\nic_amplitude = 1\nn_nodes = 32\nt_end = 1\n",
    )
    assert main(["evolve", "--config", path, "--out", str(out_dir)]) == 0
    trajectory = load_report(out_dir, "trajectory.json")
    assert trajectory["stop_reason"] == "reached_t_end"
    assert trajectory["version"] == __version__
    assert trajectory["times"][-1] == 1.0
    assert all((out_dir / name).exists() for name in trajectory["snapshots"])
    record = ArtifactStore(out_dir).load_trajectory()
    assert len(record) == len(trajectory["times"])
    report = load_report(out_dir, "evolve_report.json")
    assert report["results"]["n_drift"] == pytest.approx(0.0, abs=1e-12)


def test_evolve_underflow_exits_2(tmp_path, out_dir):
    path = write_config(
        tmp_path / "stiff.conf",
        "ic_amplitude = 1e6\nn_nodes = 16\ndt_init = 1e-3\ndt_min = 1e-4\nt_end = 1\n",
    )
    assert main(["evolve", "--config", path, "--out", str(out_dir)]) == 2
    report = load_report(out_dir, "evolve_report.json")
    assert report["error"].startswith("dt_underflow")


def test_fit_selfsim_on_synthetic_trajectory(tmp_path, out_dir, synthetic_blowup):
    source = tmp_path / "traj"
    ArtifactStore(source).save_trajectory(synthetic_blowup(nu=1.234), {})
    main(["fit-selfsim", "--trajectory", str(source), "--out", str(out_dir)])
    report = load_report(out_dir, "selfsim_report.json")
    assert report["error"] is None
    assert report["results"]["nu_fit"] == pytest.approx(1.234, abs=1e-6)
    assert passed(report, "nu_fit_in_range")
    assert passed(report, "two_beta_near_expected")
    assert (out_dir / "profile.csv").read_text().startswith("omega,phi")


def test_residual_on_synthetic_trajectory(tmp_path, out_dir, synthetic_blowup):
    source = tmp_path / "traj"
    ArtifactStore(source).save_trajectory(synthetic_blowup(), {})
    main(["residual", "--trajectory", str(source), "--out", str(out_dir)])
    report = load_report(out_dir, "residual_report.json")
    assert report["error"] is None
    assert report["results"]["residual_ratio"] >= 0.0
    assert (out_dir / "residual.csv").exists()


def test_fit_without_blowup_exits_2(tmp_path, out_dir):
    source = tmp_path / "flat"
    grid = make_log_grid(1e-4, 50.0, 16)
    record = TrajectoryRecord()
    for t in range(12):
        record.append(float(t), constant_spectrum(grid, 1.0))
    ArtifactStore(source).save_trajectory(record, {})
    assert main(["fit-selfsim", "--trajectory", str(source), "--out", str(out_dir)]) == 2
    report = load_report(out_dir, "selfsim_report.json")
    assert report["error"].startswith("NotAsymptoticError")


def test_missing_trajectory_exits_1(tmp_path, out_dir):
    assert main(["fit-selfsim", "--trajectory", str(tmp_path / "nowhere"), "--out", str(out_dir)]) == 1
