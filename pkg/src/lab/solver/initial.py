"""Initial densities and initial firing-rate histories."""
from __future__ import annotations
from pathlib import Path
from typing import Optional
import logging
import math

import numpy as np

from ..constants import SolverDefaults
from ..exceptions import ConfigValidationError, InitialDataError, InvalidParameterError
from ..model.grid import Grid
from ..model.params import ModelParams
from ..model.steady_state import SteadyState
from .history import FiringRateHistory
from .state import stencil_rate

logger = logging.getLogger("initial")


def _read_table(path: Path, columns: int = 2) -> np.ndarray:
    if not path.is_file():
        raise ConfigValidationError(f"table file not found: {path}", "initial", "path")
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ConfigValidationError(f"unreadable table {path}: {exc}", "initial", "path") from exc
    if table.shape[1] < columns or table.shape[0] < 2:
        raise ConfigValidationError(f"table {path} needs {columns} columns and >= 2 rows", "initial", "path")
    return table


class InitialDensityBuilder:
    """Builds admissible rho0: non-negative, zero at both ends, unit grid mass"""

    def __init__(self, grid: Grid):
        self._grid = grid

    def normalize(self, rho: np.ndarray) -> np.ndarray:
        rho = np.clip(np.asarray(rho, dtype=float), 0.0, None)
        rho[0] = 0.0
        rho[-1] = 0.0
        total = self._grid.integrate(rho)
        if not total > 0 or not math.isfinite(total):
            raise ConfigValidationError("initial density has no mass on the grid", "initial")
        return rho / total

    def gaussian(self, mean: float, sd: float) -> np.ndarray:
        """Gaussian minus its mirror image through V_F, so rho0(V_F) = 0"""
        if not sd > 0:
            raise InvalidParameterError("sd", sd, "must be > 0", "initial")
        if not mean < self._grid.v_max:
            raise InvalidParameterError("mean", mean, f"must be below V_F={self._grid.v_max}", "initial")
        v = self._grid.nodes
        mirror = 2.0 * self._grid.v_max - v
        profile = np.exp(-0.5 * ((v - mean) / sd) ** 2) - np.exp(-0.5 * ((mirror - mean) / sd) ** 2)
        return self.normalize(profile)

    def from_steady(self, steady: SteadyState) -> np.ndarray:
        self._grid.check_same(steady.grid, "initial")
        return self.normalize(steady.rho_inf)

    def from_table(self, path: Path) -> np.ndarray:
        table = _read_table(path)
        order = np.argsort(table[:, 0])
        rho = np.interp(self._grid.nodes, table[order, 0], table[order, 1], left=0.0, right=0.0)
        return self.normalize(rho)


def consistent_history_value(rho0: np.ndarray, params: ModelParams, grid: Grid) -> float:
    """N0(0) matching the boundary slope of rho0"""
    return max(stencil_rate(rho0, params.a, grid.dv), 0.0)


class InitialHistoryBuilder:
    """Builds N0 on [-D, 0]"""

    def __init__(self, params: ModelParams):
        self._params = params

    def constant(self, value: float) -> FiringRateHistory:
        if not value >= 0:
            raise InvalidParameterError("history value", value, "must be >= 0", "initial")
        return FiringRateHistory.constant(value, self._params.D)

    def from_table(self, path: Path) -> FiringRateHistory:
        table = _read_table(path)
        order = np.argsort(table[:, 0])
        times, values = table[order, 0], table[order, 1]
        D = self._params.D
        if times[0] > -D + 1e-12 or times[-1] < -1e-12 or times[-1] > 1e-12:
            raise ConfigValidationError(
                f"history table covers [{times[0]:g}, {times[-1]:g}], need [-{D:g}, 0]", "history", "path"
            )
        inside = times >= -D - 1e-12
        times, values = times[inside], values[inside]
        if D == 0:
            return FiringRateHistory(np.array([0.0]), values[-1:])
        return FiringRateHistory(times, values)


def check_initial_consistency(
    rho0: np.ndarray,
    history: FiringRateHistory,
    params: ModelParams,
    grid: Grid,
    rtol: float = SolverDefaults.CONSISTENCY_RTOL,
    mass_tolerance: Optional[float] = None
) -> None:
    """Validate rho0 against the grid and N0(0) against -a*rho0'(V_F)"""
    grid.check_profile(rho0, "initial")
    if np.min(rho0) < -SolverDefaults.NEGATIVE_TOLERANCE:
        raise ConfigValidationError("initial density is negative", "initial")
    if abs(rho0[-1]) > SolverDefaults.NEGATIVE_TOLERANCE:
        raise ConfigValidationError("initial density must vanish at V_F", "initial")
    tol = SolverDefaults.MASS_TOLERANCE if mass_tolerance is None else mass_tolerance
    total = grid.integrate(rho0)
    if abs(total - 1.0) > tol:
        raise ConfigValidationError(f"initial mass {total:.12g} differs from 1", "initial")
    if not history.covers(-params.D, 0.0):
        raise ConfigValidationError(
            f"initial history covers [{history.start:g}, {history.end:g}], need [-{params.D:g}, 0]", "history"
        )
    boundary = consistent_history_value(rho0, params, grid)
    seam = history.value_at(0.0)
    if abs(seam - boundary) > rtol * max(boundary, 1e-3):
        raise InitialDataError(seam, boundary, rtol)
    logger.debug(f"initial data consistent: N0(0)={seam:.6g}, slope rate={boundary:.6g}")
