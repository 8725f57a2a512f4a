"""Relative entropy, its dissipation identity and the decay fit."""

from dataclasses import replace

import numpy as np
import pytest

from src.lab.diagnostics.entropy import (
    CallbackEntropy, QuadraticEntropy, entropy_identity_check, entropy_terms, fit_decay, initial_domination,
    relative_entropy
)
from src.lab.exceptions import InvalidParameterError
from src.lab.model.grid import Grid
from src.lab.model.params import ModelParams
from src.lab.model.steady_state import SteadyStateSolver
from src.lab.solver.equilibrium import relax_steady_state
from src.lab.solver.initial import InitialDensityBuilder
from src.lab.solver.simulator import BlowUpRecord, SimulationOptions, simulate
from tests.conftest import matching_history


def test_quadratic_entropy():
    G = QuadraticEntropy()
    x = np.array([0.0, 1.0, 3.0])
    assert G.value(x).tolist() == [1.0, 0.0, 4.0]
    assert G.first(x).tolist() == [-2.0, 0.0, 4.0]
    assert G.second(x).tolist() == [2.0, 2.0, 2.0]


def test_callback_entropy():
    G = CallbackEntropy(lambda x: x * np.log(x) - x + 1, np.log, lambda x: 1.0 / x)
    assert float(G.value(np.array(1.0))) == pytest.approx(0.0)
    assert float(G.second(np.array(2.0))) == 0.5


class TestAtSteadyState:

    def test_entropy_vanishes(self, uncoupled_steady):
        assert relative_entropy(uncoupled_steady.rho_inf, uncoupled_steady) == pytest.approx(0.0, abs=1e-20)

    def test_terms_vanish(self, uncoupled, uncoupled_steady):
        terms = entropy_terms(
            uncoupled_steady.rho_inf, uncoupled_steady, uncoupled, uncoupled_steady.N_inf, uncoupled_steady.N_inf
        )
        assert terms.dissipation == pytest.approx(0.0, abs=1e-20)
        assert terms.bracket == pytest.approx(0.0, abs=1e-20)
        assert terms.delay == 0.0


def test_terms_have_signs(uncoupled, uncoupled_run, uncoupled_steady):
    rho = uncoupled_run.snapshots[0].rho
    terms = entropy_terms(rho, uncoupled_steady, uncoupled, 0.3, 0.3)
    assert terms.dissipation < 0
    assert terms.bracket <= 0
    assert terms.total == terms.dissipation + terms.bracket


def test_initial_domination(uncoupled_steady):
    assert initial_domination(2.0 * uncoupled_steady.rho_inf, uncoupled_steady) == pytest.approx(2.0)


class TestFitDecay:

    def test_exponential(self):
        times = np.linspace(0.0, 4.0, 41)
        fit = fit_decay(times, 3.0 * np.exp(-2.0 * times))
        assert fit.mu == pytest.approx(2.0)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.t_start == pytest.approx(2.0)

    def test_rejects_bad_fraction(self):
        with pytest.raises(InvalidParameterError):
            fit_decay(np.arange(5.0), np.ones(5), tail_fraction=0.0)

    def test_needs_positive_samples(self):
        with pytest.raises(InvalidParameterError):
            fit_decay(np.arange(5.0), np.zeros(5))


class TestIdentityCheck:

    def test_uncoupled_run(self, uncoupled, uncoupled_run, uncoupled_steady):
        report = entropy_identity_check(uncoupled_run, uncoupled_steady, uncoupled)
        assert report.sign_ok()
        assert report.E[-1] < report.E[0]
        assert report.fit is not None and report.fit.mu > 0
        assert report.c0_ok
        assert np.all(report.delay == 0.0)
        assert len(report.rows()) == len(uncoupled_run.snapshots)
        assert np.isfinite(report.identity_residual)

    def test_rejects_blown_up_run(self, uncoupled, uncoupled_run, uncoupled_steady):
        record = BlowUpRecord(0.5, 1e3, True, 0.51, None)
        crossed = replace(uncoupled_run, series=replace(uncoupled_run.series, blow_up=record))
        with pytest.raises(InvalidParameterError):
            entropy_identity_check(crossed, uncoupled_steady, uncoupled)


class TestDecayFloor:

    def test_round_off_samples_are_ignored(self):
        times = np.linspace(0.0, 20.0, 201)
        E = np.maximum(np.exp(-3.0 * times), 1e-22)
        fit = fit_decay(times, E)
        assert fit.mu == pytest.approx(3.0, rel=1e-6)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.t_start == pytest.approx(10.0)

    def test_floor_level_tail_is_not_a_fit(self):
        times = np.linspace(0.0, 10.0, 101)
        with pytest.raises(InvalidParameterError):
            fit_decay(times, np.full(times.size, 1e-21))


@pytest.mark.slow
class TestLongEntropyRuns:

    @staticmethod
    def _run(params, n_cells, T, dt, snapshot_every):
        grid = Grid.build(params, n_cells=n_cells)
        rho0 = InitialDensityBuilder(grid).gaussian(-1.0, 0.4)
        options = SimulationOptions(snapshot_every=snapshot_every)
        result = simulate(params, grid, rho0, matching_history(rho0, params, grid), T, dt, options=options)
        steady = SteadyStateSolver(params, grid).candidates(n_scan=60)[0]
        discrete = relax_steady_state(steady, params, dt, mass=float(result.series.mass[0]))
        return result, discrete

    def test_identity_holds_on_a_fine_grid(self, uncoupled):
        result, discrete = self._run(uncoupled, 2000, 1.0, 1e-4, 0.005)
        report = entropy_identity_check(result, discrete, uncoupled)
        assert report.sign_ok()
        assert report.identity_residual <= 5e-3

    def test_weak_coupling_decays_exponentially(self):
        params = ModelParams(a=1.0, b=0.1, b0=0.0, D=0.2, V_R=-1.0, V_F=0.0)
        result, discrete = self._run(params, 400, 20.0, 1e-3, 0.1)
        report = entropy_identity_check(result, discrete, params)
        assert report.fit is not None
        assert report.fit.mu > 0
        assert report.fit.r_squared >= 0.99
