"""Shared fixtures: small grids and cheap parameter sets."""

import numpy as np
import pytest

from src.lab.config import reset_lab_settings
from src.lab.model.grid import Grid
from src.lab.model.params import ModelParams
from src.lab.solver.history import FiringRateHistory
from src.lab.solver.initial import InitialDensityBuilder, consistent_history_value


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_lab_settings()
    yield
    reset_lab_settings()


@pytest.fixture
def free_params():
    """Uncoupled network: a = 1, b = 0, b0 = 0, V_R = -1, V_F = 0"""
    return ModelParams(a=1.0, b=0.0, b0=0.0, D=0.0, V_R=-1.0, V_F=0.0)


@pytest.fixture
def inhibitory_params():
    return ModelParams(a=1.0, b=-0.5, b0=0.0, D=0.2, V_R=-1.0, V_F=0.0)


@pytest.fixture
def small_grid(free_params):
    return Grid.build(free_params, n_cells=200)


@pytest.fixture
def gaussian_rho0(small_grid):
    return InitialDensityBuilder(small_grid).gaussian(-1.0, 0.4)


def matching_history(rho0: np.ndarray, params: ModelParams, grid: Grid) -> FiringRateHistory:
    return FiringRateHistory.constant(consistent_history_value(rho0, params, grid), params.D)
