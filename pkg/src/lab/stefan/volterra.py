from __future__ import annotations
from dataclasses import dataclass
from typing import Optional, Tuple, Union
import logging
import math

import numpy as np
from scipy.special import erfcinv

from ..constants import StefanDefaults
from ..exceptions import InvalidParameterError, SolverError
from ..helpers.logging_utils import LoggingFormatter
from ..helpers.timing import StageTimer
from ..model.params import ModelParams
from ..solver.history import FiringRateHistory
from .coordinates import FluxHistory, alpha, free_boundary, prehistory_flux, require_normalized
from .kernel import fixed_offset_weights, linear_data_slope_integral, moving_source_weights


@dataclass(frozen=True)
class StefanSegment:
    """One continuation window: the flux on a uniform tau grid, the boundary
    at nodes and panel midpoints, and the field the window started from"""
    tau: np.ndarray
    M: np.ndarray
    s: np.ndarray
    s_mid: np.ndarray
    s1_mid: np.ndarray
    x0: np.ndarray
    u0: np.ndarray
    iterations: int
    distance: float

    @property
    def start(self) -> float:
        return float(self.tau[0])

    @property
    def end(self) -> float:
        return float(self.tau[-1])

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.tau[:-1] + self.tau[1:])

    @property
    def M_mid(self) -> np.ndarray:
        return 0.5 * (self.M[:-1] + self.M[1:])


@dataclass(frozen=True)
class ContractionReport:
    """Size of the two boundary-integral operators on the solved window.

    phi1 comes from the sink term travelling with s(tau), phi2 from the
    source at the reset image. ``phi1_bound`` is 2 m I0 sqrt(sigma)/sqrt(4 pi)
    with I0 the largest difference quotient of s met on the window.
    """
    sigma: float
    m: float
    I0: float
    phi1: float
    phi1_bound: float
    phi2: float
    safe_sigma: float

    @property
    def contractive(self) -> bool:
        return self.phi1 < 0.5 and self.phi2 < 0.5


@dataclass(frozen=True)
class FixedPointResult:
    segment: StefanSegment
    flux: FluxHistory
    report: ContractionReport
    halvings: int
    reset_voltage: float

    @property
    def tau(self) -> np.ndarray:
        return self.segment.tau

    @property
    def M(self) -> np.ndarray:
        return self.segment.M

    @property
    def s(self) -> np.ndarray:
        return self.segment.s

    @property
    def s1(self) -> np.ndarray:
        return self.segment.s + self.reset_voltage / alpha(self.segment.tau)

    @property
    def sigma(self) -> float:
        return self.report.sigma

    @property
    def iterations(self) -> int:
        return self.segment.iterations

    @property
    def within_ball(self) -> bool:
        return bool(np.max(np.abs(self.segment.M)) <= self.report.m * (1.0 + 1e-9))


def ball_radius(x0: np.ndarray, u0: np.ndarray) -> float:
    """m = 1 + 2 sup|u0'|"""
    return 1.0 + 2.0 * float(np.max(np.abs(np.diff(u0) / np.diff(x0))))


class VolterraSolver:
    """Picard iteration for the boundary flux M on one window [tau0, tau0 + sigma].

    The flux solves
        M(tau) = -2 int G(s(tau), tau, xi, tau0) u0'(xi) dxi
                 + 2 int M(eta) dG/dx(s(tau), tau, s(eta), eta) deta
                 - 2 int M(eta) dG/dx(s(tau), tau, s1(eta), eta) deta
    with s given by the flux history. Time integrals use product integration:
    M is averaged on each panel and the kernel is integrated exactly.
    """

    def __init__(
        self,
        params: ModelParams,
        flux_before: FluxHistory,
        x0: np.ndarray,
        u0: np.ndarray,
        tau_step: float = StefanDefaults.TAU_STEP,
        tol: float = StefanDefaults.TOLERANCE,
        max_iter: int = StefanDefaults.MAX_ITER,
        sigma_min: float = StefanDefaults.SIGMA_MIN
    ):
        require_normalized(params)
        x0 = np.asarray(x0, dtype=float)
        u0 = np.asarray(u0, dtype=float)
        if x0.ndim != 1 or x0.shape != u0.shape or x0.size < 3:
            raise InvalidParameterError("u0", x0.shape, "need at least 3 matching samples", "stefan")
        if np.any(np.diff(x0) <= 0):
            raise InvalidParameterError("x0", "nodes", "must be strictly increasing", "stefan")
        if abs(u0[-1]) > 1e-9 * max(1.0, float(np.max(np.abs(u0)))):
            raise InvalidParameterError("u0", float(u0[-1]), "must vanish on the free boundary", "stefan")
        if not (tau_step > 0 and tol > 0 and max_iter >= 1):
            raise InvalidParameterError("tau_step/tol/max_iter", (tau_step, tol, max_iter), "must be positive", "stefan")
        self._params = params
        self._flux = flux_before
        self._tau0 = flux_before.end
        self._x0 = x0
        self._u0 = u0
        self._tau_step = tau_step
        self._tol = tol
        self._max_iter = max_iter
        self._sigma_min = sigma_min
        self._m = ball_radius(x0, u0)
        self._logger = logging.getLogger(self.__class__.__name__)

        s0 = float(free_boundary(np.array([self._tau0]), params, flux_before)[0])
        if abs(x0[-1] - s0) > 1e-9 * max(1.0, abs(s0)):
            raise InvalidParameterError("x0", float(x0[-1]), f"last node must sit on s(tau0)={s0:.6g}", "stefan")

    @property
    def m(self) -> float:
        return self._m

    def _drift_speed(self) -> float:
        """A priori bound on |s'| over windows of length at most one"""
        params = self._params
        history = float(np.max(np.abs(self._flux.M) / alpha(self._flux.z)))
        ahead = self._m * math.sqrt(2.0 * (self._tau0 + 1.0) + 1.0)
        return abs(params.b0) + abs(params.b) * max(history, ahead)

    def safe_sigma(self) -> float:
        """Window length for which both operators are contractions a priori"""
        I0 = self._drift_speed()
        gap = abs(self._params.V_R)
        limits = [1.0, (gap / (4.0 * float(erfcinv(1.0 / (2.0 * self._m))))) ** 2]
        if I0 > 0:
            limits += [math.pi / (4.0 * self._m ** 2 * I0 ** 2), gap / (2.0 * I0)]
        return min(limits)

    def _boundary(self, tau: np.ndarray, M: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        flux = self._flux.extended(tau, M)
        mid = 0.5 * (tau[:-1] + tau[1:])
        s = free_boundary(tau, self._params, flux)
        s_mid = free_boundary(mid, self._params, flux)
        return s, s_mid, s_mid + self._params.V_R / alpha(mid)

    def _weights(self, tau: np.ndarray, s: np.ndarray, s_mid: np.ndarray, s1_mid: np.ndarray):
        """Lower-triangular panel weights: row k-1 holds tau_k, column j panel [tau_j, tau_j+1]"""
        n = tau.size - 1
        k = np.arange(1, n + 1)[:, None]
        j = np.arange(n)[None, :]
        active = j < k
        r_near = np.where(active, tau[k] - tau[np.minimum(j + 1, n)], 0.0)
        r_far = np.where(active, tau[k] - tau[j], 1.0)
        mid = 0.5 * (tau[:-1] + tau[1:])
        c = np.where(active, (s[k] - s_mid[j]) / np.where(active, tau[k] - mid[j], 1.0), 0.0)
        sink = np.where(active, moving_source_weights(c, r_near, r_far), 0.0)
        source = np.where(active, fixed_offset_weights(s[k] - s1_mid[j], r_near, r_far), 0.0)
        return sink, source, float(np.max(np.abs(c))) if n else 0.0

    def _iterate(self, sigma: float):
        n = max(1, int(math.ceil(sigma / self._tau_step - 1e-9)))
        tau = self._tau0 + sigma * np.linspace(0.0, 1.0, n + 1)
        M = np.full(n + 1, float(self._flux.M[-1]))
        data_term: Optional[np.ndarray] = None
        last_s: Optional[np.ndarray] = None
        previous = math.inf
        growth = 0
        for iteration in range(1, self._max_iter + 1):
            s, s_mid, s1_mid = self._boundary(tau, M)
            if last_s is None or not np.array_equal(s, last_s):
                data_term = -2.0 * linear_data_slope_integral(s[1:], self._x0, self._u0, tau[1:] - self._tau0)
                sink, source, I0 = self._weights(tau, s, s_mid, s1_mid)
                last_s = s
            M_mid = 0.5 * (M[:-1] + M[1:])
            updated = M.copy()
            updated[1:] = data_term + 2.0 * (sink - source) @ M_mid
            distance = float(np.max(np.abs(updated - M)))
            M = updated
            if not np.isfinite(distance):
                return None
            if distance <= self._tol * max(1.0, float(np.max(np.abs(M)))):
                s, s_mid, s1_mid = self._boundary(tau, M)
                sink, source, I0 = self._weights(tau, s, s_mid, s1_mid)
                segment = StefanSegment(tau, M, s, s_mid, s1_mid, self._x0, self._u0, iteration, distance)
                return segment, sink, source, I0
            growth = growth + 1 if distance >= previous else 0
            if growth >= 3:
                return None
            previous = distance
        return None

    def solve(self, sigma: Optional[float] = None) -> FixedPointResult:
        safe = self.safe_sigma()
        sigma = safe if sigma is None else float(sigma)
        if not sigma > 0:
            raise InvalidParameterError("sigma", sigma, "window length must be > 0", "stefan")
        halvings = 0
        with StageTimer("stefan.fixed_point", self._logger, sigma=sigma, nodes=self._x0.size):
            while True:
                outcome = self._iterate(sigma)
                if outcome is not None:
                    break
                sigma *= 0.5
                halvings += 1
                self._logger.warning(f"Picard iteration not contracting, window halved to {sigma:.6g}")
                if sigma < self._sigma_min:
                    raise SolverError(
                        f"no contracting window above {self._sigma_min:g} from tau={self._tau0:.6g}", "stefan"
                    )
        segment, sink, source, I0 = outcome
        report = ContractionReport(
            sigma=sigma,
            m=self._m,
            I0=I0,
            phi1=2.0 * self._m * float(np.max(np.sum(np.abs(sink), axis=1))),
            phi1_bound=2.0 * self._m * I0 * math.sqrt(sigma) / math.sqrt(4.0 * math.pi),
            phi2=2.0 * self._m * float(np.max(np.sum(np.abs(source), axis=1))),
            safe_sigma=safe
        )
        self._logger.info(f"fixed point {LoggingFormatter.format(report.__dict__)}")
        return FixedPointResult(
            segment, self._flux.extended(segment.tau, segment.M), report, halvings, self._params.V_R
        )


def fixed_point_M(
    x0: np.ndarray,
    u0: np.ndarray,
    prehistory: Union[FiringRateHistory, FluxHistory],
    params: ModelParams,
    sigma: Optional[float] = None,
    tol: float = StefanDefaults.TOLERANCE,
    tau_step: float = StefanDefaults.TAU_STEP,
    max_iter: int = StefanDefaults.MAX_ITER
) -> FixedPointResult:
    """Flux M on [0, sigma] for initial field u0 on nodes x0 (x0[-1] = 0) and
    prehistory N0 on [-D, 0]; the window is halved until the iteration contracts"""
    flux = prehistory if isinstance(prehistory, FluxHistory) else prehistory_flux(prehistory, params)
    return VolterraSolver(params, flux, x0, u0, tau_step=tau_step, tol=tol, max_iter=max_iter).solve(sigma)
