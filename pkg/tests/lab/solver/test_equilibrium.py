"""Fixed point of the discrete scheme."""

import numpy as np
import pytest

from src.lab.exceptions import InvalidParameterError
from src.lab.model.grid import Grid
from src.lab.model.params import ModelParams
from src.lab.model.steady_state import SteadyStateSolver
from src.lab.solver.equilibrium import relax_steady_state
from src.lab.solver.history import FiringRateHistory
from src.lab.solver.scheme import FokkerPlanckScheme
from src.lab.solver.state import DensityState


@pytest.fixture(scope="module")
def closed_form():
    params = ModelParams(a=1.0, b=0.0, b0=0.0, D=0.0, V_R=-1.0, V_F=0.0)
    return params, SteadyStateSolver(params, Grid.build(params, n_cells=200)).candidates(n_scan=60)[0]


@pytest.fixture(scope="module")
def relaxed(closed_form):
    params, steady = closed_form
    return relax_steady_state(steady, params, 1e-3)


def test_relaxed_state_does_not_move(closed_form, relaxed):
    params, _ = closed_form
    history = FiringRateHistory.constant(relaxed.N_inf, 0.0)
    state = DensityState(relaxed.rho_inf.copy(), 0.0, history, rate=relaxed.N_inf)
    moved = FokkerPlanckScheme(params, relaxed.grid).step(state, 1e-3)
    assert np.max(np.abs(moved.rho - relaxed.rho_inf)) <= 1e-10 * np.max(relaxed.rho_inf)
    assert moved.rate == pytest.approx(relaxed.N_inf, rel=1e-9)


def test_relaxed_state_is_near_the_closed_form(closed_form, relaxed):
    _, steady = closed_form
    grid = steady.grid
    assert relaxed.mass_residual <= 1e-10
    assert grid.integrate(np.abs(relaxed.rho_inf - steady.rho_inf / grid.integrate(steady.rho_inf))) <= 1e-2
    assert relaxed.N_inf == pytest.approx(steady.N_inf, rel=1e-2)
    assert relaxed.b_used == steady.b_used


def test_fixed_point_does_not_depend_on_the_step(closed_form, relaxed):
    params, steady = closed_form
    finer = relax_steady_state(steady, params, 5e-4)
    np.testing.assert_allclose(finer.rho_inf, relaxed.rho_inf, rtol=0, atol=1e-8 * np.max(relaxed.rho_inf))
    assert finer.N_inf == pytest.approx(relaxed.N_inf, rel=1e-7)


def test_mass_is_rescaled(closed_form):
    params, steady = closed_form
    half = relax_steady_state(steady, params, 1e-3, mass=0.5, max_time=1.0)
    assert steady.grid.integrate(half.rho_inf) == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("dt, max_time", [(0.0, 1.0), (1e-3, 0.0)])
def test_rejects_non_positive_steps(closed_form, dt, max_time):
    params, steady = closed_form
    with pytest.raises(InvalidParameterError):
        relax_steady_state(steady, params, dt, max_time=max_time)
