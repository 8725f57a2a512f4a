"""End-to-end scenario runs on cheap grids."""

import pytest

from src.lab.cli.experiment_config import load_experiment_config
from src.lab.cli.runner import ExperimentRunner
from src.lab.enums import ExitCode, Scenario


def _summary(directory):
    lines = (directory / "summary.txt").read_text(encoding="utf-8").splitlines()
    return dict(line.split(" = ", 1) for line in lines)


def _run(write_config, tmp_path, scenario, extra=""):
    config = load_experiment_config(write_config(extra), scenario, tmp_path / "out")
    return ExperimentRunner().run(config), tmp_path / "out"


def test_simulate(write_config, tmp_path):
    code, out = _run(write_config, tmp_path, Scenario.SIMULATE)
    assert code == ExitCode.SUCCESS.value
    summary = _summary(out)
    assert summary["scenario"] == "simulate"
    assert summary["exit_code"] == "0"
    assert summary["blow_up"] == "false"
    assert float(summary["t_final"]) == pytest.approx(0.2)
    assert float(summary["mass_drift"]) <= 1e-6
    assert {p.name for p in out.iterdir()} == {"summary.txt", "config.json", "series.csv", "snapshots.csv"}
    assert (out / "series.csv").read_text(encoding="utf-8").startswith("t,N,mass,first_moment,leaked,clamped\n")


def test_invalid_initial_data_exits_with_validation_code(write_config, tmp_path):
    base = write_config().read_text(encoding="utf-8").replace("mean = -1", "mean = 0.5")
    path = tmp_path / "bad.ini"
    path.write_text(base, encoding="utf-8")
    config = load_experiment_config(path, Scenario.SIMULATE, tmp_path / "bad")
    assert ExperimentRunner().run(config) == ExitCode.VALIDATION.value
    assert not (tmp_path / "bad").exists()


def test_missing_steady_state_exits_with_numeric_code(write_config, tmp_path):
    code, out = _run(write_config, tmp_path, Scenario.ENTROPY, "[steady]\nN_lo = 10\nN_hi = 20\nn_scan = 10\n")
    assert code == ExitCode.NUMERIC.value
    assert not out.exists()


def test_steady(write_config, tmp_path):
    code, out = _run(write_config, tmp_path, Scenario.STEADY, "[steady]\nn_scan = 60\nevolve = true\n")
    assert code == 0
    summary = _summary(out)
    assert summary["n_roots"] == "1"
    assert float(summary["steady_l1_distance"]) < 1e-2
    assert (out / "steady_profiles.csv").is_file()


def test_entropy(write_config, tmp_path):
    code, out = _run(write_config, tmp_path, Scenario.ENTROPY, "[steady]\nn_scan = 60\n[diagnostics]\nV_M = -2\n")
    assert code == 0
    summary = _summary(out)
    assert summary["entropy_sign_ok"] == "true"
    assert float(summary["poincare_gamma"]) > 0
    assert "weighted_l2_initial" in summary
    assert (out / "entropy.csv").is_file()


def test_periodicity_scan(write_config, tmp_path):
    extra = "[diagnostics]\nperiod_min = 0.05\nperiod_max = 0.15\nperiod_count = 3\n"
    code, out = _run(write_config, tmp_path, Scenario.PERIODICITY_SCAN, extra)
    assert code == 0
    summary = _summary(out)
    assert summary["period_contradiction"] == "false"
    assert len((out / "period_scan.csv").read_text(encoding="utf-8").splitlines()) == 4


def test_particle_compare(write_config, tmp_path):
    code, out = _run(write_config, tmp_path, Scenario.PARTICLE_COMPARE, "[particle]\nn_neurons = 1000\n")
    assert code == 0
    summary = _summary(out)
    assert float(summary["particle_l1_distance"]) < 1.0
    assert "N_inf" in summary
    assert (out / "spikes.csv").is_file()


def test_particle_compare_is_seeded(write_config, tmp_path):
    first, out_a = _run(write_config, tmp_path / "a", Scenario.PARTICLE_COMPARE, "[particle]\nn_neurons = 1000\n")
    second, out_b = _run(write_config, tmp_path / "b", Scenario.PARTICLE_COMPARE, "[particle]\nn_neurons = 1000\n")
    assert (out_a / "particle_rate.csv").read_bytes() == (out_b / "particle_rate.csv").read_bytes()


def test_stefan_oracle(write_config, tmp_path):
    code, out = _run(write_config, tmp_path, Scenario.STEFAN_ORACLE, "[stefan]\nhorizon = 0.05\n")
    assert code == 0
    summary = _summary(out)
    assert summary["stefan_boundary_monotonicity"] == "constant"
    assert int(summary["stefan_iterations"]) >= 1
    assert (out / "stefan.csv").is_file()


def test_supersolution_check(write_config, tmp_path):
    base = write_config().read_text(encoding="utf-8").replace("b = 0", "b = 1").replace("D = 0", "D = 0.5").replace("n_cells = 200", "n_cells = 400")
    path = tmp_path / "super.ini"
    path.write_text(base, encoding="utf-8")
    config = load_experiment_config(path, Scenario.SUPERSOLUTION_CHECK, tmp_path / "out")
    assert ExperimentRunner().run(config) == 0
    summary = _summary(tmp_path / "out")
    assert summary["supersolution_passed"] == "true"
    assert summary["envelope_ok"] == "true"
    assert float(summary["envelope_alpha"]) > 0


def test_sweep_writes_one_directory_per_value(write_config, tmp_path):
    extra = "[sweep]\nparameter = model.b\nvalues = -0.5, 0\n"
    code, out = _run(write_config, tmp_path, Scenario.SIMULATE, extra)
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["model.b=-0.5", "model.b=0"]


@pytest.mark.parametrize("scenario, extra", [
    (Scenario.SIMULATE, ""),
    (Scenario.STEADY, "[steady]\nn_scan = 60\nevolve = true\n"),
    (Scenario.ENTROPY, "[steady]\nn_scan = 60\n"),
    (Scenario.PERIODICITY_SCAN, "[diagnostics]\nperiod_min = 0.05\nperiod_max = 0.15\nperiod_count = 3\n"),
    (Scenario.PARTICLE_COMPARE, "[particle]\nn_neurons = 1000\n"),
    (Scenario.STEFAN_ORACLE, "[stefan]\nhorizon = 0.05\n"),
])
def test_repeated_runs_write_identical_tables(write_config, tmp_path, scenario, extra):
    first, out_a = _run(write_config, tmp_path / "a", scenario, extra)
    second, out_b = _run(write_config, tmp_path / "b", scenario, extra)
    assert first == second == 0
    tables = sorted(p.name for p in out_a.glob("*.csv"))
    assert tables
    assert tables == sorted(p.name for p in out_b.glob("*.csv"))
    for name in tables:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


@pytest.mark.slow
def test_stefan_oracle_agrees_with_the_inhibitory_run(write_config, tmp_path):
    base = (
        write_config().read_text(encoding="utf-8")
        .replace("b = 0", "b = -0.5").replace("D = 0", "D = 0.2")
        .replace("n_cells = 200", "n_cells = 600").replace("dt = 1e-3", "dt = 1e-4")
        .replace("snapshot_every = 0.05", "snapshot_every = 0.01")
    )
    path = tmp_path / "stefan.ini"
    path.write_text(base + "\n[stefan]\nhorizon = 0.2\ntau_step = 1e-3\n", encoding="utf-8")
    config = load_experiment_config(path, Scenario.STEFAN_ORACLE, tmp_path / "out")
    assert ExperimentRunner().run(config) == 0
    summary = _summary(tmp_path / "out")
    assert float(summary["stefan_M_rel_error"]) <= 0.02
    assert float(summary["stefan_rho_l1_error"]) <= 0.02
