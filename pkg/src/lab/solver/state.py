from __future__ import annotations
from dataclasses import dataclass, field
import logging

import numpy as np

from ..constants import SolverDefaults
from ..exceptions import InvalidParameterError
from ..model.grid import Grid
from ..model.params import ModelParams
from .history import FiringRateHistory

logger = logging.getLogger("state")


@dataclass
class DensityState:
    """Density on the grid at time t with the firing-rate history feeding the delay

    A frozen state never appends to its history: the drift only reads the
    prescribed N0, which is the linear problem solved on [0, D).
    ``fired`` is the mass that left through V_F in the last step and ``rate``
    the matching firing rate (fired/dt, clamped at zero).
    """
    rho: np.ndarray
    t: float
    history: FiringRateHistory
    frozen: bool = False
    clamped: int = 0
    leaked: float = 0.0
    fired: float = field(default=0.0)
    rate: float = 0.0

    def copy(self) -> "DensityState":
        return DensityState(
            self.rho.copy(), self.t, self.history.copy(), self.frozen, self.clamped, self.leaked, self.fired,
            self.rate
        )


def stencil_rate(rho: np.ndarray, a: float, dv: float) -> float:
    """-a * d(rho)/dv at the last node, second order one-sided, using rho(V_F) = 0"""
    return a * (4.0 * rho[-2] - rho[-3] - 3.0 * rho[-1]) / (2.0 * dv)


def firing_rate(
    state: DensityState,
    params: ModelParams,
    grid: Grid,
    tolerance: float = SolverDefaults.STENCIL_TOLERANCE
) -> float:
    """Boundary flux N = -a d(rho)/dv(V_F), clamped at zero

    A stencil value below -tolerance is counted on ``state.clamped``.
    """
    if grid.n_cells < 4:
        raise InvalidParameterError("n_cells", grid.n_cells, "firing-rate stencil needs >= 4 cells", "fp-solver")
    raw = stencil_rate(state.rho, params.a, grid.dv)
    if raw < -tolerance:
        state.clamped += 1
        logger.warning(f"negative stencil firing rate {raw:.3e} clamped at t={state.t:.6g}")
    return max(raw, 0.0)


def delayed_drift(state: DensityState, params: ModelParams) -> float:
    """mu(t - D) = b0 + b * N(t - D), read from the history buffer"""
    if params.b == 0.0:
        return params.b0
    return params.b0 + params.b * state.history.value_at(state.t - params.D)


def mass(rho: np.ndarray, grid: Grid) -> float:
    return grid.integrate(rho)


def first_moment(rho: np.ndarray, grid: Grid) -> float:
    return grid.integrate(grid.nodes * rho)
