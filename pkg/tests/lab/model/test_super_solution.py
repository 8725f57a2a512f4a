"""Unit tests for the comparison profile construction and its check."""

import numpy as np
import pytest

from src.lab.enums import Region
from src.lab.exceptions import InvalidParameterError
from src.lab.model.grid import Grid
from src.lab.model.params import ModelParams
from src.lab.model.super_solution import (
    SuperSolution,
    SuperSolutionBuilder,
    build_super_solution,
    verify_super_solution,
)
from src.lab.solver.initial import InitialDensityBuilder
from src.lab.solver.simulator import simulate
from tests.conftest import matching_history


@pytest.fixture
def excitatory():
    return ModelParams(a=1.0, b=1.0, b0=0.0, D=0.5, V_R=-1.0, V_F=0.0)


@pytest.fixture
def grid(excitatory):
    return Grid.build(excitatory, n_cells=400)


class TestSuperSolutionBuilder:

    def test_needs_zero_stimulus(self, excitatory):
        with pytest.raises(InvalidParameterError):
            SuperSolutionBuilder(excitatory.with_values(b0=0.3))

    def test_drift_bound_at_corners(self, excitatory):
        assert SuperSolutionBuilder(excitatory).drift_bound(2.0) == pytest.approx(3.0)

    def test_rejects_negative_history_bound(self, excitatory, grid):
        with pytest.raises(InvalidParameterError):
            SuperSolutionBuilder(excitatory).build(-1.0, grid)

    def test_profile_shape(self, excitatory, grid):
        ss = build_super_solution(excitatory, 1.0, grid)
        below = grid.nodes <= excitatory.V_R
        assert np.all(ss.f_profile[below] == 1.0)
        assert ss.f_profile[-1] == pytest.approx(0.0, abs=1e-12)
        assert np.all(ss.f_profile[:-1] > 0)
        assert ss.xi > 1.0


@pytest.mark.parametrize("b, N0_max", [(0.5, 0.5), (1.0, 1.0), (2.0, 3.0), (-1.0, 2.0)])
def test_verification_passes_across_sweep(b, N0_max):
    params = ModelParams(a=1.0, b=b, b0=0.0, D=0.5, V_R=-1.0, V_F=0.0)
    grid = Grid.build(params, n_cells=400)
    ss = build_super_solution(params, N0_max, grid)
    report = verify_super_solution(ss, params, N0_max, grid)
    assert report.passed
    assert report.worst_residual >= -1e-8
    assert set(report.min_residual) == {Region.BELOW_RESET, Region.MIDDLE, Region.RIGHT}


def test_constant_profile_fails_the_jump_condition(excitatory, grid):
    ss = SuperSolution.from_profile(np.ones(grid.n_cells + 1), grid, xi=2.0)
    report = verify_super_solution(ss, excitatory, 1.0, grid)
    assert not report.jump_ok
    assert not report.passed


class TestEnvelope:

    def test_domination_factor(self, excitatory, grid):
        ss = build_super_solution(excitatory, 1.0, grid)
        assert ss.domination_factor(0.5 * ss.f_profile) == pytest.approx(0.5)

    def test_envelope_grows_with_xi(self, excitatory, grid):
        ss = build_super_solution(excitatory, 1.0, grid)
        envelope = ss.envelope(np.array([0.0, 1.0]), 2.0, excitatory.a)
        assert envelope[0] == pytest.approx(2.0)
        assert envelope[1] == pytest.approx(2.0 * np.exp(ss.xi))

    def test_dominated_run_stays_under_envelope(self, excitatory, grid):
        ss = build_super_solution(excitatory, 2.0, grid)
        assert verify_super_solution(ss, excitatory, 2.0, grid).passed
        rho0 = InitialDensityBuilder(grid).normalize(ss.f_profile)
        history = matching_history(rho0, excitatory, grid)
        assert history.maximum() <= 2.0
        factor = ss.domination_factor(rho0)
        result = simulate(excitatory, grid, rho0, history, excitatory.D, 1e-3, frozen_history=True)
        times = result.series.times
        inside = times < excitatory.D
        envelope = ss.envelope(times, factor, excitatory.a)
        assert np.all(result.series.N[inside] <= envelope[inside])
