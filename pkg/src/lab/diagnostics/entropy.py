from __future__ import annotations
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Optional
import logging

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import linregress

from ..constants import DiagnosticsDefaults
from ..exceptions import InvalidParameterError, NumericError
from ..helpers.timing import StageTimer
from ..model.grid import Grid
from ..model.params import ModelParams
from ..model.steady_state import SteadyState
from ..solver.simulator import SimulationResult


class IEntropyFunction(ABC):
    """Convex C2 function G with G(1) = 0"""

    @abstractmethod
    def value(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def first(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def second(self, x: np.ndarray) -> np.ndarray:
        pass


class QuadraticEntropy(IEntropyFunction):
    """G(x) = (x - 1)^2"""

    def value(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - 1.0) ** 2

    def first(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (np.asarray(x) - 1.0)

    def second(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), 2.0)


class CallbackEntropy(IEntropyFunction):
    """G and its derivatives supplied as vectorized callables"""

    def __init__(
        self,
        G: Callable[[np.ndarray], np.ndarray],
        dG: Callable[[np.ndarray], np.ndarray],
        d2G: Callable[[np.ndarray], np.ndarray]
    ):
        self._G = G
        self._dG = dG
        self._d2G = d2G

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._G(x), dtype=float)

    def first(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._dG(x), dtype=float)

    def second(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._d2G(x), dtype=float)


def _split_gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    """d/dv taken separately on [v_min, V_R] and [V_R, V_F]; both sides share node r.

    The integrands that use this are summed side by side, so node r gets the
    left derivative in the left piece and the right one in the right piece.
    """
    r = grid.r_index
    left = np.gradient(values[:r + 1], grid.dv, edge_order=2)
    right = np.gradient(values[r:], grid.dv, edge_order=2)
    return np.concatenate([left, right])


def _face_dissipation(
    q: np.ndarray, rho_inf: np.ndarray, grid: Grid, entropy: IEntropyFunction
) -> float:
    """int rho_inf (dq/dv)^2 G''(q) dv from face differences weighted by face averages"""
    dq = np.diff(q) / grid.dv
    weight = 0.5 * (rho_inf[1:] + rho_inf[:-1])
    curvature = 0.5 * (entropy.second(q[1:]) + entropy.second(q[:-1]))
    return float(np.sum(weight * dq ** 2 * curvature) * grid.dv)


def _side_integral(split_values: np.ndarray, grid: Grid) -> float:
    r = grid.r_index
    return float(trapezoid(split_values[:r + 1], dx=grid.dv) + trapezoid(split_values[r + 1:], dx=grid.dv))


def _duplicate_reset(values: np.ndarray, grid: Grid) -> np.ndarray:
    r = grid.r_index
    return np.concatenate([values[:r + 1], values[r:]])


def density_ratio(rho: np.ndarray, steady: SteadyState, N: float, floor: float = DiagnosticsDefaults.RHO_FLOOR) -> np.ndarray:
    """q = rho/rho_inf on the nodes; the V_F node carries the limit N/N_inf"""
    grid = steady.grid
    grid.check_profile(rho, "diagnostics")
    interior = steady.rho_inf[1:-1]
    if np.any(interior < floor):
        index = int(np.argmin(interior)) + 1
        raise NumericError(
            f"steady density {steady.rho_inf[index]:.3g} below floor {floor:g} at node {index}", "diagnostics"
        )
    q = np.empty_like(rho, dtype=float)
    q[1:-1] = rho[1:-1] / interior
    q[0] = 0.0 if steady.rho_inf[0] < floor else rho[0] / steady.rho_inf[0]
    q[-1] = N / steady.N_inf
    return q


def relative_entropy(
    rho: np.ndarray,
    steady: SteadyState,
    entropy: IEntropyFunction = QuadraticEntropy(),
    N: Optional[float] = None
) -> float:
    """int rho_inf G(rho/rho_inf) dv; N only fixes the ratio at V_F, where the weight vanishes"""
    q = density_ratio(rho, steady, steady.N_inf if N is None else N)
    return steady.grid.integrate(steady.rho_inf * entropy.value(q))


@dataclass(frozen=True)
class EntropyTerms:
    dissipation: float
    bracket: float
    delay: float

    @property
    def total(self) -> float:
        return self.dissipation + self.bracket + self.delay


def entropy_terms(
    rho: np.ndarray,
    steady: SteadyState,
    params: ModelParams,
    N: float,
    N_delayed: float,
    entropy: IEntropyFunction = QuadraticEntropy()
) -> EntropyTerms:
    """Right-hand side of dE/dt: dissipation, reset bracket and delay coupling"""
    grid = steady.grid
    q = density_ratio(rho, steady, N)
    dissipation = -params.a * _face_dissipation(q, steady.rho_inf, grid, entropy)

    F = N / steady.N_inf
    q_R = q[grid.r_index]
    bregman = entropy.value(F) - entropy.value(q_R) - (F - q_R) * entropy.first(q_R)
    bracket = -steady.N_inf * float(bregman)

    delay = 0.0
    if params.b != 0.0:
        q2 = _duplicate_reset(q, grid)
        drho_inf = _split_gradient(steady.rho_inf, grid)
        integrand = drho_inf * (entropy.value(q2) - q2 * entropy.first(q2))
        delay = params.b * (N_delayed - steady.N_inf) * _side_integral(integrand, grid)
    return EntropyTerms(dissipation, bracket, delay)


@dataclass(frozen=True)
class DecayFit:
    mu: float
    r_squared: float
    stderr: float
    t_start: float


def fit_decay(
    times: np.ndarray,
    E: np.ndarray,
    tail_fraction: float = DiagnosticsDefaults.TAIL_FRACTION,
    floor: float = DiagnosticsDefaults.ENTROPY_FLOOR
) -> DecayFit:
    """Least squares of log E on the final ``tail_fraction`` of the run; mu = -slope

    Samples at or below ``floor`` are round-off and never enter the fit. When
    fewer than three tail samples remain, the fit uses the final
    ``tail_fraction`` of the samples above the floor instead.
    """
    if not 0 < tail_fraction <= 1:
        raise InvalidParameterError("tail_fraction", tail_fraction, "must lie in (0, 1]", "diagnostics")
    times = np.asarray(times, dtype=float)
    E = np.asarray(E, dtype=float)
    above = E > floor
    t_start = times[-1] - tail_fraction * (times[-1] - times[0])
    keep = (times >= t_start) & above
    if np.count_nonzero(keep) < 3 and np.count_nonzero(above) >= 3:
        resolved = times[above]
        t_start = resolved[-1] - tail_fraction * (resolved[-1] - resolved[0])
        keep = (times >= t_start) & above
    if np.count_nonzero(keep) < 3:
        raise InvalidParameterError(
            "entropy tail", int(np.count_nonzero(keep)), f"need >= 3 samples above {floor:g}", "diagnostics"
        )
    fit = linregress(times[keep], np.log(E[keep]))
    return DecayFit(float(-fit.slope), float(fit.rvalue ** 2), float(fit.stderr), float(t_start))


def initial_domination(rho0: np.ndarray, steady: SteadyState, floor: float = DiagnosticsDefaults.RHO_FLOOR) -> float:
    """Smallest C0 with rho0 <= C0 rho_inf on the interior nodes"""
    interior = steady.rho_inf[1:-1]
    if np.any(interior < floor):
        return float("inf")
    return float(np.max(np.asarray(rho0)[1:-1] / interior))


@dataclass
class EntropyReport:
    times: np.ndarray
    E: np.ndarray
    dE_dt_measured: np.ndarray
    dissipation: np.ndarray
    bracket: np.ndarray
    delay: np.ndarray
    fit: Optional[DecayFit]
    c0_ratio: float
    c0_ok: bool

    @property
    def dE_dt_identity(self) -> np.ndarray:
        return self.dissipation + self.bracket + self.delay

    @property
    def identity_residual(self) -> float:
        """max |measured - identity| relative to max |measured|, endpoints excluded"""
        inner = slice(1, -1) if self.times.size > 2 else slice(None)
        scale = float(np.max(np.abs(self.dE_dt_measured[inner]))) if self.times.size else 0.0
        gap = float(np.max(np.abs(self.dE_dt_measured[inner] - self.dE_dt_identity[inner])))
        return gap / scale if scale > 0 else gap

    def sign_ok(self, tolerance: float = 1e-12) -> bool:
        return bool(np.all(self.dissipation <= tolerance) and np.all(self.bracket <= tolerance))

    def rows(self) -> List[List[float]]:
        return np.column_stack([
            self.times, self.E, self.dE_dt_measured, self.dissipation, self.bracket, self.delay,
            self.dE_dt_identity
        ]).tolist()


def entropy_identity_check(
    result: SimulationResult,
    steady: SteadyState,
    params: ModelParams,
    entropy: IEntropyFunction = QuadraticEntropy(),
    tail_fraction: float = DiagnosticsDefaults.TAIL_FRACTION,
    c0_limit: float = DiagnosticsDefaults.C0_LIMIT
) -> EntropyReport:
    """Entropy, its measured derivative and the term-by-term right-hand side per snapshot"""
    logger = logging.getLogger("EntropyCheck")
    if result.series.blow_up is not None:
        raise InvalidParameterError("run", "blow-up", "entropy identity needs a smooth run", "diagnostics")
    steady.grid.check_same(result.grid, "diagnostics")
    if len(result.snapshots) < 3:
        raise InvalidParameterError("snapshots", len(result.snapshots), "need at least 3 snapshots", "diagnostics")

    history = result.rate_history()
    c0 = initial_domination(result.snapshots[0].rho, steady)
    c0_ok = bool(np.isfinite(c0) and c0 <= c0_limit)
    if not c0_ok:
        logger.warning(f"initial density not dominated by the steady state: C0={c0:.3g}")

    times, E, terms = [], [], []
    with StageTimer("entropy.identity", logger, snapshots=len(result.snapshots)):
        for snapshot in result.snapshots:
            q_rate = history.value_at(snapshot.t)
            N_delayed = history.value_at(snapshot.t - params.D) if params.b != 0.0 else 0.0
            times.append(snapshot.t)
            E.append(relative_entropy(snapshot.rho, steady, entropy, q_rate))
            terms.append(entropy_terms(snapshot.rho, steady, params, q_rate, N_delayed, entropy))

    times_arr = np.array(times)
    E_arr = np.array(E)
    fit = None
    try:
        fit = fit_decay(times_arr, E_arr, tail_fraction)
    except InvalidParameterError as exc:
        logger.warning(exc.get_log_message())
    return EntropyReport(
        times=times_arr,
        E=E_arr,
        dE_dt_measured=np.gradient(E_arr, times_arr, edge_order=2),
        dissipation=np.array([x.dissipation for x in terms]),
        bracket=np.array([x.bracket for x in terms]),
        delay=np.array([x.delay for x in terms]),
        fit=fit,
        c0_ratio=c0,
        c0_ok=c0_ok,
    )
