"""Unit tests for the finite-volume step."""

import numpy as np
import pytest

from src.lab.exceptions import CFLViolationError
from src.lab.helpers.parallel import ParallelSweepExecutor, SerialSweepExecutor
from src.lab.model.grid import Grid
from src.lab.model.params import ModelParams
from src.lab.model.steady_state import SteadyStateSolver
from src.lab.solver.history import FiringRateHistory
from src.lab.solver.initial import InitialDensityBuilder
from src.lab.solver.scheme import FokkerPlanckScheme, SchemeOptions, diffusion_operator, van_leer_slope
from src.lab.solver.simulator import simulate
from src.lab.solver.state import DensityState, delayed_drift, firing_rate, stencil_rate
from tests.conftest import matching_history


def _state(rho0, params, grid):
    history = matching_history(rho0, params, grid)
    return DensityState(rho0.copy(), 0.0, history, rate=history.value_at(0.0))


class TestVanLeerSlope:

    def test_zero_at_extremum(self):
        assert van_leer_slope(np.array([1.0]), np.array([-1.0]))[0] == 0.0

    def test_harmonic_mean_on_monotone_data(self):
        assert van_leer_slope(np.array([1.0]), np.array([3.0]))[0] == pytest.approx(1.5)


class TestFokkerPlanckScheme:

    def test_step_conserves_mass(self, free_params, small_grid, gaussian_rho0):
        scheme = FokkerPlanckScheme(free_params, small_grid)
        state = _state(gaussian_rho0, free_params, small_grid)
        for _ in range(50):
            state = scheme.step(state, 1e-3)
        assert small_grid.integrate(state.rho) + state.leaked == pytest.approx(1.0, abs=1e-10)
        assert state.t == pytest.approx(0.05)

    def test_history_grows_with_each_step(self, free_params, small_grid, gaussian_rho0):
        scheme = FokkerPlanckScheme(free_params, small_grid)
        state = scheme.step(_state(gaussian_rho0, free_params, small_grid), 1e-3)
        assert state.history.end == pytest.approx(1e-3)
        assert state.history.latest == state.rate
        assert state.rate == pytest.approx(state.fired / 1e-3)

    def test_frozen_state_keeps_its_history(self, free_params, small_grid, gaussian_rho0):
        scheme = FokkerPlanckScheme(free_params, small_grid)
        state = _state(gaussian_rho0, free_params, small_grid)
        state.frozen = True
        stepped = scheme.step(state, 1e-3)
        assert stepped.history.end == 0.0

    def test_cfl_violation(self, free_params, small_grid, gaussian_rho0):
        scheme = FokkerPlanckScheme(free_params, small_grid)
        with pytest.raises(CFLViolationError):
            scheme.advance(_state(gaussian_rho0, free_params, small_grid), 1.0)

    def test_without_reinjection_mass_leaves_through_threshold(self, free_params, small_grid, gaussian_rho0):
        scheme = FokkerPlanckScheme(free_params, small_grid, SchemeOptions(reinject=False))
        state = _state(gaussian_rho0, free_params, small_grid)
        for _ in range(20):
            state = scheme.step(state, 1e-3)
        assert small_grid.integrate(state.rho) < 1.0 - 1e-4


class TestFiringFlux:

    @pytest.fixture
    def excitatory(self):
        return ModelParams(a=1.0, b=3.0, b0=0.0, D=0.0, V_R=-1.0, V_F=0.0)

    def test_recorded_rate_is_the_reinjected_outflow(self, excitatory):
        grid = Grid.build(excitatory, n_cells=400)
        rho0 = InitialDensityBuilder(grid).gaussian(-0.2, 0.1)
        scheme = FokkerPlanckScheme(excitatory, grid)
        state = _state(rho0, excitatory, grid)
        for _ in range(40):
            h = 0.5 * scheme.max_stable_dt(delayed_drift(state, excitatory))
            before = grid.integrate(state.rho) + state.leaked
            state = scheme.step(state, h)
            assert state.history.latest == state.rate
            assert state.rate == pytest.approx(state.fired / h, rel=1e-12)
            assert grid.integrate(state.rho) + state.leaked == pytest.approx(before, abs=1e-12)
        assert state.rate > 0

    def test_outflow_matches_boundary_stencil_at_steady_state(self, free_params):
        grid = Grid.build(free_params, n_cells=400)
        steady = SteadyStateSolver(free_params, grid).candidates(n_scan=60)[0]
        rho0 = InitialDensityBuilder(grid).from_steady(steady)
        state = DensityState(rho0, 0.0, FiringRateHistory.constant(steady.N_inf, 0.0), rate=steady.N_inf)
        stepped = FokkerPlanckScheme(free_params, grid).step(state, 1e-3)
        assert stepped.rate == pytest.approx(stencil_rate(stepped.rho, free_params.a, grid.dv), rel=1e-2)
        assert stepped.rate == pytest.approx(steady.N_inf, rel=1e-2)

    def test_step_from_steady_state_barely_moves(self, free_params):
        grid = Grid.build(free_params, n_cells=400)
        steady = SteadyStateSolver(free_params, grid).candidates(n_scan=60)[0]
        rho0 = InitialDensityBuilder(grid).from_steady(steady)
        state = DensityState(rho0.copy(), 0.0, FiringRateHistory.constant(steady.N_inf, 0.0), rate=steady.N_inf)
        stepped = FokkerPlanckScheme(free_params, grid).step(state, 1e-3)
        assert np.max(np.abs(stepped.rho - rho0)) < 5e-3


class TestDiffusionOperator:

    def test_cached_and_read_only(self, free_params, small_grid):
        first = FokkerPlanckScheme(free_params, small_grid).diffusion(1e-3)
        second = FokkerPlanckScheme(free_params, small_grid).diffusion(1e-3)
        assert first is second
        with pytest.raises(ValueError):
            first.banded[1, 0] = 0.0
        with pytest.raises(ValueError):
            first.reset_response[0] = 0.0

    def test_solve_matches_dense_system(self):
        op = diffusion_operator(1.0, 0.1, 6, 2, 0.01, True)
        dense = np.diag(np.full(6, 1.0 + 2.0 * op.lam)) - op.lam * (np.eye(6, k=1) + np.eye(6, k=-1))
        dense[2, -1] -= op.lam
        rhs = np.linspace(1.0, 2.0, 6)
        assert np.allclose(op.solve(rhs), np.linalg.solve(dense, rhs), rtol=1e-12, atol=0.0)

    def test_threaded_runs_match_serial_runs(self, free_params, small_grid, gaussian_rho0):
        history = matching_history(gaussian_rho0, free_params, small_grid)

        def job(dt):
            return simulate(free_params, small_grid, gaussian_rho0, history, 0.1, dt).series.N

        steps = [1e-3, 2e-3, 1e-3, 2e-3]
        serial = SerialSweepExecutor().execute(job, steps)
        threaded = ParallelSweepExecutor(4).execute(job, steps)
        for expected, actual in zip(serial, threaded):
            assert np.array_equal(expected, actual)


def test_stencil_rate_of_linear_profile():
    rho = np.array([0.0, 3.0, 2.0, 1.0, 0.0])
    assert stencil_rate(rho, a=2.0, dv=0.5) == pytest.approx(4.0)


class TestFiringRateClamp:

    def test_negative_stencil_is_clamped_and_counted(self, free_params, small_grid):
        rho = np.zeros_like(small_grid.nodes)
        rho[-3] = 1.0
        state = DensityState(rho, 0.5, FiringRateHistory.constant(0.0, 0.0))
        assert firing_rate(state, free_params, small_grid) == 0.0
        assert state.clamped == 1
        firing_rate(state, free_params, small_grid)
        assert state.clamped == 2

    def test_round_off_is_not_counted(self, free_params, small_grid):
        rho = np.zeros_like(small_grid.nodes)
        rho[-3] = 1e-14
        state = DensityState(rho, 0.5, FiringRateHistory.constant(0.0, 0.0))
        assert firing_rate(state, free_params, small_grid) == 0.0
        assert state.clamped == 0
