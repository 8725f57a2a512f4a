import pytest

from src.lab.model.grid import Grid
from src.lab.model.params import ModelParams
from src.lab.model.steady_state import SteadyStateSolver
from src.lab.solver.initial import InitialDensityBuilder
from src.lab.solver.simulator import SimulationOptions, simulate
from tests.conftest import matching_history


def run(params: ModelParams, T: float = 1.0, n_cells: int = 200):
    grid = Grid.build(params, n_cells=n_cells)
    rho0 = InitialDensityBuilder(grid).gaussian(-1.0, 0.4)
    options = SimulationOptions(snapshot_every=0.05)
    return simulate(params, grid, rho0, matching_history(rho0, params, grid), T, 1e-3, options=options)


@pytest.fixture(scope="module")
def uncoupled():
    return ModelParams(a=1.0, b=0.0, b0=0.0, D=0.0, V_R=-1.0, V_F=0.0)


@pytest.fixture(scope="module")
def uncoupled_run(uncoupled):
    return run(uncoupled)


@pytest.fixture(scope="module")
def uncoupled_steady(uncoupled, uncoupled_run):
    return SteadyStateSolver(uncoupled, uncoupled_run.grid).candidates(n_scan=60)[0]
