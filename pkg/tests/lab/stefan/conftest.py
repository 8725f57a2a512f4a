import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.lab.model.params import ModelParams
from src.lab.solver.history import FiringRateHistory
from src.lab.stefan.volterra import fixed_point_M


def mirrored_gaussian(x: np.ndarray, mean: float = -1.0, sd: float = 0.4) -> np.ndarray:
    u = np.exp(-0.5 * ((x - mean) / sd) ** 2) - np.exp(-0.5 * ((-x - mean) / sd) ** 2)
    return u / trapezoid(u, x)


@pytest.fixture(scope="module")
def field0():
    x0 = np.linspace(-6.0, 0.0, 601)
    return x0, mirrored_gaussian(x0)


@pytest.fixture(scope="module")
def delayed_free_params():
    return ModelParams(a=1.0, b=0.0, b0=0.0, D=0.5, V_R=-1.0, V_F=0.0)


@pytest.fixture(scope="module")
def short_window(field0, delayed_free_params):
    x0, u0 = field0
    N0 = u0[-2] / (x0[-1] - x0[-2])
    return fixed_point_M(x0, u0, FiringRateHistory.constant(N0, delayed_free_params.D), delayed_free_params, sigma=0.05)
