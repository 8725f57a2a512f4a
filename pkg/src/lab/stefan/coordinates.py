"""Changes of variables between (t, v) and the heat-equation frame (tau, x).

tau = (exp(2t) - 1)/2, alpha(tau) = (2 tau + 1)^(-1/2), y = v/alpha,
x = y + s(tau), u = alpha * rho, M = alpha^2 * N.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..enums import MapDirection, Monotonicity
from ..exceptions import HistoryGapError, InvalidParameterError
from ..model.grid import Grid
from ..model.params import ModelParams
from ..solver.history import FiringRateHistory


def tau_of_t(t):
    return 0.5 * np.expm1(2.0 * np.asarray(t, dtype=float))


def t_of_tau(tau):
    return 0.5 * np.log1p(2.0 * np.asarray(tau, dtype=float))


def alpha(tau):
    return 1.0 / np.sqrt(1.0 + 2.0 * np.asarray(tau, dtype=float))


def require_normalized(params: ModelParams) -> None:
    if not params.is_normalized:
        raise InvalidParameterError(
            "params", (params.a, params.V_F), "Stefan frame needs a = 1 and V_F = 0", "stefan"
        )


def decoupling_bound(params: ModelParams) -> float:
    """Largest window on which the boundary only depends on earlier flux"""
    D_bar = params.D_bar
    return D_bar / (2.0 * (1.0 - D_bar))


class FluxHistory:
    """Flux samples M(z) on [-D_bar/2, z_end] with exact integrals of the
    piecewise-linear interpolant of M(z)/alpha(z)"""

    def __init__(self, z: np.ndarray, M: np.ndarray):
        z = np.asarray(z, dtype=float)
        M = np.asarray(M, dtype=float)
        if z.ndim != 1 or z.shape != M.shape or z.size == 0:
            raise InvalidParameterError("flux history", z.shape, "need matching 1-D samples", "stefan")
        if z.size > 1 and np.any(np.diff(z) <= 0):
            raise InvalidParameterError("flux history", "z", "must be strictly increasing", "stefan")
        self._z = z
        self._M = M
        self._g = M / alpha(z)
        self._cumulative = (
            cumulative_trapezoid(self._g, z, initial=0.0) if z.size > 1 else np.zeros(1)
        )

    @property
    def z(self) -> np.ndarray:
        return self._z

    @property
    def M(self) -> np.ndarray:
        return self._M

    @property
    def end(self) -> float:
        return float(self._z[-1])

    def value_at(self, z) -> np.ndarray:
        return np.interp(z, self._z, self._M)

    def integral(self, upper) -> np.ndarray:
        """integral of M(z)/alpha(z) from the first sample to ``upper``"""
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        tol = 1e-12 * max(1.0, abs(self.end))
        if np.any(upper > self.end + tol) or np.any(upper < self._z[0] - tol):
            bad = float(upper[(upper > self.end + tol) | (upper < self._z[0] - tol)][0])
            raise HistoryGapError(bad, float(self._z[0]), self.end)
        if self._z.size == 1:
            return np.zeros_like(upper)
        upper = np.clip(upper, self._z[0], self.end)
        idx = np.clip(np.searchsorted(self._z, upper, side="right") - 1, 0, self._z.size - 2)
        width = upper - self._z[idx]
        g_upper = np.interp(upper, self._z, self._g)
        return self._cumulative[idx] + 0.5 * width * (self._g[idx] + g_upper)

    def extended(self, z: np.ndarray, M: np.ndarray) -> "FluxHistory":
        """History followed by samples strictly after its end"""
        later = z > self.end + 1e-14 * max(1.0, abs(self.end))
        return FluxHistory(np.concatenate([self._z, z[later]]), np.concatenate([self._M, M[later]]))

    def truncated(self, end: float) -> "FluxHistory":
        keep = self._z <= end + 1e-14 * max(1.0, abs(end))
        return FluxHistory(self._z[keep], self._M[keep])


def prehistory_flux(history: FiringRateHistory, params: ModelParams, samples: int = 401) -> FluxHistory:
    """M0(z) = alpha(z)^2 N0(log(2z+1)/2) on [-D_bar/2, 0]"""
    D_bar = params.D_bar
    if D_bar == 0.0:
        return FluxHistory(np.array([0.0]), np.array([history.value_at(0.0)]))
    z = np.linspace(-0.5 * D_bar, 0.0, samples)
    t = np.clip(t_of_tau(z), -params.D, 0.0)
    N0 = np.array([history.value_at(float(x)) for x in t])
    return FluxHistory(z, alpha(z) ** 2 * N0)


def free_boundary(tau, params: ModelParams, flux: FluxHistory) -> np.ndarray:
    """s(tau) = -b0(sqrt(2tau+1) - 1) - b/sqrt(1-D_bar) * int_{-D_bar/2}^{(1-D_bar)tau - D_bar/2} M/alpha dz"""
    tau = np.asarray(tau, dtype=float)
    D_bar = params.D_bar
    stimulus = -params.b0 * (np.sqrt(2.0 * tau + 1.0) - 1.0)
    if params.b == 0.0:
        return stimulus
    upper = (1.0 - D_bar) * tau - 0.5 * D_bar
    coupling = flux.integral(upper.ravel()).reshape(tau.shape)
    return stimulus - params.b / math.sqrt(1.0 - D_bar) * coupling


def boundary_monotonicity(s: np.ndarray, tolerance: float = 1e-14) -> Monotonicity:
    steps = np.diff(np.asarray(s, dtype=float))
    if steps.size == 0 or np.all(np.abs(steps) <= tolerance):
        return Monotonicity.CONSTANT
    if np.all(steps >= -tolerance):
        return Monotonicity.INCREASING
    if np.all(steps <= tolerance):
        return Monotonicity.DECREASING
    return Monotonicity.NONE


class CoordinateMap:
    """(t, v) <-> (tau, x) for a given free boundary s(tau)"""

    def __init__(
        self,
        params: ModelParams,
        direction: MapDirection = MapDirection.FORWARD,
        boundary: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ):
        require_normalized(params)
        self._params = params
        self._direction = direction
        self._boundary = boundary if boundary is not None else (lambda tau: np.zeros_like(np.asarray(tau, dtype=float)))

    @property
    def direction(self) -> MapDirection:
        return self._direction

    @property
    def params(self) -> ModelParams:
        return self._params

    def inverted(self) -> "CoordinateMap":
        flipped = MapDirection.INVERSE if self._direction is MapDirection.FORWARD else MapDirection.FORWARD
        return CoordinateMap(self._params, flipped, self._boundary)

    def apply(self, first, second) -> Tuple[np.ndarray, np.ndarray]:
        if self._direction is MapDirection.FORWARD:
            tau = tau_of_t(first)
            return tau, np.asarray(second, dtype=float) / alpha(tau) + self._boundary(tau)
        tau = np.asarray(first, dtype=float)
        return t_of_tau(tau), (np.asarray(second, dtype=float) - self._boundary(tau)) * alpha(tau)

    def density_factor(self, first) -> np.ndarray:
        """Factor multiplying densities (forward) or fields (inverse) at the given time"""
        if self._direction is MapDirection.FORWARD:
            return alpha(tau_of_t(first))
        return 1.0 / alpha(np.asarray(first, dtype=float))

    def flux_factor(self, first) -> np.ndarray:
        if self._direction is MapDirection.FORWARD:
            return alpha(tau_of_t(first)) ** 2
        return 1.0 / alpha(np.asarray(first, dtype=float)) ** 2


@dataclass(frozen=True)
class StefanField:
    tau: float
    x: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class StefanData:
    """Solver output expressed in the heat-equation frame"""
    tau: np.ndarray
    M: np.ndarray
    s: np.ndarray
    fields: List[StefanField]
    flux: FluxHistory


def to_stefan(
    snapshots: Sequence,
    rate_history: FiringRateHistory,
    params: ModelParams,
    grid: Grid
) -> StefanData:
    """Map density snapshots and N on [-D, T] into (tau, x, u), M and s"""
    require_normalized(params)
    times = rate_history.times
    z_all = tau_of_t(times)
    M_all = alpha(z_all) ** 2 * rate_history.values
    flux = FluxHistory(z_all, M_all)
    forward = times >= 0
    tau = z_all[forward]
    s = free_boundary(tau, params, flux)
    mapping = CoordinateMap(params, MapDirection.FORWARD, lambda x: free_boundary(x, params, flux))
    fields = []
    for snapshot in snapshots:
        tau_k, x = mapping.apply(np.full(grid.nodes.shape, snapshot.t), grid.nodes)
        fields.append(StefanField(float(tau_k[0]), x, mapping.density_factor(snapshot.t) * snapshot.rho))
    return StefanData(tau, M_all[forward], s, fields, flux)
