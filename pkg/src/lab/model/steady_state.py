from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import bisect
from scipy.special import dawsn, log_ndtr

from ..constants import SteadyStateDefaults
from ..exceptions import InvalidParameterError, NumericError, SolverError
from ..helpers.timing import StageTimer
from .grid import Grid
from .params import ModelParams
from .quadrature import adaptive_trapezoid


@dataclass(frozen=True)
class SteadyState:
    """Stationary profile on a grid and its firing rate

    ``rho_inf`` holds the closed-form profile sampled at the grid nodes; its
    continuum mass deviates from one by ``mass_residual``.
    """
    N_inf: float
    rho_inf: np.ndarray
    b_used: float
    mass_residual: float
    grid: Grid

    def scaled(self, factor: float) -> "SteadyState":
        return SteadyState(self.N_inf, self.rho_inf * factor, self.b_used, self.mass_residual, self.grid)


def _log_dawson_gap(y0: np.ndarray, y1: float) -> np.ndarray:
    """log of exp(-y0^2) * integral_{y0}^{y1} exp(t^2) dt for y0 <= y1.

    Uses the Dawson function D(y) = exp(-y^2) * integral_0^y exp(t^2) dt, so the
    integral equals exp(y1^2) D(y1) - exp(y0^2) D(y0). The larger exponent is
    factored out before subtracting.
    """
    y0 = np.asarray(y0, dtype=float)
    spread = y1 * y1 - y0 * y0
    top = np.maximum(spread, 0.0)
    inner = np.exp(spread - top) * dawsn(y1) - np.exp(-top) * dawsn(y0)
    with np.errstate(divide="ignore"):
        return top + np.log(np.maximum(inner, 0.0))


class SteadyStateProfile:
    """Closed-form stationary density for a prescribed firing rate N

    rho(v) = (N/a) exp(-(v-mu)^2/2a) * integral_{max(v,V_R)}^{V_F} exp((w-mu)^2/2a) dw,
    mu = b0 + b*N, evaluated in log form.
    """

    def __init__(self, params: ModelParams, N: float):
        if not N > 0:
            raise InvalidParameterError("N", N, "firing rate must be > 0", "core-model")
        self._params = params
        self._N = N
        self._mu = params.drift(N)
        self._width = math.sqrt(2.0 * params.a)
        self._y_reset = (params.V_R - self._mu) / self._width
        self._y_fire = (params.V_F - self._mu) / self._width
        self._log_prefactor = math.log(N) + 0.5 * math.log(2.0 / params.a)

    def _y(self, v: np.ndarray) -> np.ndarray:
        return (np.asarray(v, dtype=float) - self._mu) / self._width

    def log_values(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        y = self._y(v)
        above = v >= self._params.V_R
        log_rho = np.empty_like(y)
        log_rho[above] = self._log_prefactor + _log_dawson_gap(y[above], self._y_fire)
        tail = _log_dawson_gap(np.array([self._y_reset]), self._y_fire)[0]
        log_rho[~above] = self._log_prefactor + self._y_reset ** 2 - y[~above] ** 2 + tail
        log_rho[v >= self._params.V_F] = -np.inf
        return log_rho

    def values(self, v: np.ndarray) -> np.ndarray:
        return np.exp(self.log_values(v))

    def log_mass(self, rtol: float = SteadyStateDefaults.QUADRATURE_RTOL) -> float:
        """log of the continuum mass over (-inf, V_F]"""
        params = self._params
        tail = _log_dawson_gap(np.array([self._y_reset]), self._y_fire)[0]
        log_left = (
            self._log_prefactor + self._y_reset ** 2 + tail
            + 0.5 * math.log(2.0 * math.pi * params.a) + float(log_ndtr(math.sqrt(2.0) * self._y_reset))
        )
        samples = np.linspace(params.V_R, params.V_F, 129)
        log_gap = _log_dawson_gap(self._y(samples), self._y_fire)
        shift = float(np.max(log_gap))
        if not np.isfinite(shift) or not np.isfinite(log_left):
            raise NumericError(f"non-finite profile at N={self._N:.6g}", "steady-state")
        right = adaptive_trapezoid(
            lambda v: np.exp(_log_dawson_gap(self._y(v), self._y_fire) - shift),
            params.V_R, params.V_F, rtol=rtol
        )
        log_right = self._log_prefactor + shift + math.log(right.value) if right.value > 0 else -math.inf
        return float(np.logaddexp(log_left, log_right))


def steady_state_profile(params: ModelParams, N: float, v: np.ndarray) -> np.ndarray:
    """Unnormalized profile for firing rate N at voltages v, zero at and above V_F"""
    return SteadyStateProfile(params, N).values(np.asarray(v, dtype=float))


def steady_state_mass(params: ModelParams, N: float) -> float:
    """F(N): continuum mass of the profile built with firing rate N"""
    return math.exp(SteadyStateProfile(params, N).log_mass())


class SteadyStateSolver:
    """Finds every firing rate N whose profile has unit mass inside a bracket"""

    def __init__(self, params: ModelParams, grid: Optional[Grid] = None):
        self._params = params
        self._grid = grid if grid is not None else Grid.build(params)
        self._logger = logging.getLogger(self.__class__.__name__)

    def _log_mass(self, N: float) -> float:
        return SteadyStateProfile(self._params, N).log_mass()

    def scan(self, N_bracket: Sequence[float], n_scan: int) -> List[Tuple[float, float]]:
        """Log-spaced brackets on which log F(N) changes sign"""
        lo, hi = float(N_bracket[0]), float(N_bracket[1])
        if not (0 < lo < hi) or not math.isfinite(hi):
            raise InvalidParameterError("N_bracket", (lo, hi), "need 0 < N_lo < N_hi", "core-model")
        if n_scan < 2:
            raise InvalidParameterError("n_scan", n_scan, "need at least 2 scan points", "core-model")
        rates = np.geomspace(lo, hi, n_scan)
        values = np.array([self._log_mass(N) for N in rates])
        brackets = []
        for i in range(n_scan - 1):
            if values[i] == 0.0:
                brackets.append((rates[i], rates[i]))
            elif values[i] * values[i + 1] < 0:
                brackets.append((rates[i], rates[i + 1]))
        if values[-1] == 0.0:
            brackets.append((rates[-1], rates[-1]))
        return brackets

    def refine(self, bracket: Tuple[float, float], rtol: float = SteadyStateDefaults.ROOT_RTOL) -> float:
        lo, hi = bracket
        if lo == hi:
            return lo
        try:
            return float(bisect(self._log_mass, lo, hi, xtol=lo * 1e-15, rtol=rtol, maxiter=400))
        except (ValueError, RuntimeError) as exc:
            raise SolverError(f"bisection failed on [{lo:.6g}, {hi:.6g}]: {exc}", "steady-state") from exc

    def build(self, N: float) -> SteadyState:
        profile = SteadyStateProfile(self._params, N)
        rho = profile.values(self._grid.nodes)
        rho[-1] = 0.0
        if not np.all(np.isfinite(rho)):
            raise NumericError(f"non-finite steady profile at N={N:.6g}", "steady-state")
        residual = abs(math.exp(profile.log_mass()) - 1.0)
        return SteadyState(N_inf=N, rho_inf=rho, b_used=self._params.b, mass_residual=residual, grid=self._grid)

    def candidates(
        self,
        N_bracket: Sequence[float] = (SteadyStateDefaults.N_LO, SteadyStateDefaults.N_HI),
        n_scan: int = SteadyStateDefaults.N_SCAN
    ) -> List[SteadyState]:
        with StageTimer(
            "steady_state.candidates", self._logger, b=self._params.b, bracket=tuple(N_bracket), n_scan=n_scan
        ):
            roots = [self.refine(bracket) for bracket in self.scan(N_bracket, n_scan)]
        self._logger.info(f"{len(roots)} steady state(s) for b={self._params.b:g}: {[f'{r:.10g}' for r in roots]}")
        return [self.build(N) for N in roots]


def steady_state_candidates(
    params: ModelParams,
    N_bracket: Sequence[float] = (SteadyStateDefaults.N_LO, SteadyStateDefaults.N_HI),
    n_scan: int = SteadyStateDefaults.N_SCAN,
    grid: Optional[Grid] = None
) -> List[SteadyState]:
    """One SteadyState per sign change of F(N) - 1 inside N_bracket"""
    return SteadyStateSolver(params, grid).candidates(N_bracket, n_scan)
