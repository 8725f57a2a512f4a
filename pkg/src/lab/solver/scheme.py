from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple
import logging

import numpy as np
from scipy.linalg import solve_banded

from ..constants import SolverDefaults
from ..exceptions import CFLViolationError, NumericError
from ..model.grid import Grid
from ..model.params import ModelParams
from .state import DensityState, delayed_drift


@dataclass(frozen=True)
class SchemeOptions:
    """Switches of the finite-volume step

    leak scales the -v part of the drift; reinject=False turns off the reset
    source (pure absorption at V_F).
    """
    leak: float = 1.0
    reinject: bool = True
    negative_tolerance: float = SolverDefaults.NEGATIVE_TOLERANCE
    stencil_tolerance: float = SolverDefaults.STENCIL_TOLERANCE


def van_leer_slope(upwind_gap: np.ndarray, local_gap: np.ndarray) -> np.ndarray:
    """Harmonic-mean limited difference, zero at extrema"""
    num = upwind_gap * np.abs(local_gap) + np.abs(upwind_gap) * local_gap
    den = np.abs(upwind_gap) + np.abs(local_gap)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


@dataclass(frozen=True)
class DiffusionOperator:
    """Implicit diffusion over the interior nodes with the V_F outflow fed into the V_R row

    The matrix is the tridiagonal I + dt*L (Dirichlet zeros at both ends) minus
    lam on the (reset, last) entry, so the diffusive flux through V_F leaves and
    re-enters in the same solve. The rank-one term is handled by
    Sherman-Morrison: ``reset_response`` is lam * A^-1 e_reset. Arrays are
    read-only; instances are shared between threads.
    """
    banded: np.ndarray
    lam: float
    reset_response: Optional[np.ndarray]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = solve_banded((1, 1), self.banded, rhs, check_finite=False)
        if self.reset_response is None:
            return y
        w = self.reset_response
        return y + w * (y[-1] / (1.0 - w[-1]))


@lru_cache(maxsize=32)
def diffusion_operator(a: float, dv: float, n_interior: int, reset_row: int, dt: float,
                       reinject: bool) -> DiffusionOperator:
    lam = a * dt / dv ** 2
    banded = np.empty((3, n_interior))
    banded[0, 0] = 0.0
    banded[0, 1:] = -lam
    banded[1, :] = 1.0 + 2.0 * lam
    banded[2, :-1] = -lam
    banded[2, -1] = 0.0
    banded.setflags(write=False)
    response = None
    if reinject:
        unit = np.zeros(n_interior)
        unit[reset_row] = lam
        response = solve_banded((1, 1), banded, unit)
        response.setflags(write=False)
    return DiffusionOperator(banded, lam, response)


class FokkerPlanckScheme:
    """IMEX finite-volume step on the node grid

    Diffusion is implicit (tridiagonal, Dirichlet zeros at both ends), drift is
    explicit MUSCL upwinding with a van Leer limiter. The discrete outflow
    through V_F, diffusive plus advective, is the firing rate of the step: it
    is re-injected into the control volume of V_R and appended to the history,
    so mass only changes through v_min.
    """

    def __init__(self, params: ModelParams, grid: Grid, options: SchemeOptions = SchemeOptions()):
        self._params = params
        self._grid = grid
        self._options = options
        self._faces = grid.faces
        self._logger = logging.getLogger(self.__class__.__name__)

    @property
    def options(self) -> SchemeOptions:
        return self._options

    def face_velocity(self, mu: float) -> np.ndarray:
        return -self._options.leak * self._faces + mu

    def max_stable_dt(self, mu: float) -> float:
        speed = max(abs(-self._options.leak * self._faces[0] + mu), abs(-self._options.leak * self._faces[-1] + mu))
        return np.inf if speed == 0 else self._grid.dv / speed

    def advective_flux(self, rho: np.ndarray, velocity: np.ndarray) -> np.ndarray:
        padded = np.pad(rho, 1)
        left, right = rho[:-1], rho[1:]
        local = right - left
        forward = left + 0.5 * van_leer_slope(left - padded[:-3], local)
        backward = right - 0.5 * van_leer_slope(padded[3:] - right, local)
        return velocity * np.where(velocity > 0, forward, backward)

    def diffusion(self, dt: float) -> DiffusionOperator:
        grid = self._grid
        return diffusion_operator(
            self._params.a, grid.dv, grid.n_cells - 1, grid.r_index - 1, dt, self._options.reinject
        )

    def advance(self, state: DensityState, dt: float) -> Tuple[np.ndarray, float, float]:
        """New density, mass fired through V_F and mass leaked through v_min"""
        grid, a = self._grid, self._params.a
        mu = delayed_drift(state, self._params)
        dt_max = self.max_stable_dt(mu)
        if dt > dt_max * (1.0 + 1e-12):
            raise CFLViolationError(dt, dt_max, state.t)
        velocity = self.face_velocity(mu)
        flux = self.advective_flux(state.rho, velocity)
        rhs = state.rho[1:-1] - dt / grid.dv * (flux[1:] - flux[:-1])
        if self._options.reinject:
            rhs[grid.r_index - 1] += dt / grid.dv * flux[-1]
        new = np.zeros_like(state.rho)
        new[1:-1] = self.diffusion(dt).solve(rhs)
        fired = dt * (a * new[-2] / grid.dv + flux[-1])
        leaked = dt * (a * new[1] / grid.dv - flux[0])
        return new, fired, leaked

    def step(self, state: DensityState, dt: float) -> DensityState:
        new, fired, leaked = self.advance(state, dt)
        if not np.all(np.isfinite(new)):
            raise NumericError("non-finite density", "fp-solver", state.t + dt, {"rho": state.rho.copy()})
        low = int(np.argmin(new))
        if new[low] < -self._options.negative_tolerance:
            raise NumericError(
                f"negative density {new[low]:.3e} at node {low}", "fp-solver", state.t + dt,
                {"rho": new, "node": low, "min": float(new[low])}
            )
        t_new = state.t + dt
        raw = fired / dt
        clamped = state.clamped
        if raw < -self._options.stencil_tolerance:
            clamped += 1
            self._logger.warning(f"negative firing flux {raw:.3e} clamped at t={t_new:.6g}")
        rate = max(raw, 0.0)
        if not state.frozen:
            state.history.append(t_new, rate)
            state.history.prune(t_new - self._params.D - dt)
        return DensityState(new, t_new, state.history, state.frozen, clamped, state.leaked + leaked, fired, rate)


def step(state: DensityState, params: ModelParams, grid: Grid, dt: float,
         options: SchemeOptions = SchemeOptions()) -> DensityState:
    """One conservative IMEX step; the state's history buffer is extended in place"""
    return FokkerPlanckScheme(params, grid, options).step(state, dt)
