"""First-moment balance of the delayed equation.

Multiplying the equation by v and integrating gives
    dm1/dt = -m1 + mu(t - D) * mass - (V_F - V_R) * N,
so over any period of a periodic solution with b0 = 0
    int v Phi dv = (b - (V_F - V_R)) * Nbar.
With V_F <= 0 the left side is never positive, so b > V_F - V_R rules
periodic solutions out.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Sequence
import logging

import numpy as np
from scipy.integrate import trapezoid

from ..constants import DiagnosticsDefaults
from ..enums import SignSide
from ..exceptions import InvalidParameterError
from ..model.params import ModelParams
from ..solver.simulator import SimulationResult


def sign_side(value: float, tolerance: float = 0.0) -> SignSide:
    if value > tolerance:
        return SignSide.POSITIVE
    if value < -tolerance:
        return SignSide.NEGATIVE
    return SignSide.ZERO


@dataclass
class MomentReport:
    times: np.ndarray
    m1: np.ndarray
    residual: np.ndarray
    params: ModelParams
    N: np.ndarray
    N_delayed: np.ndarray

    @property
    def max_residual(self) -> float:
        inner = self.residual[1:-1] if self.residual.size > 2 else self.residual
        return float(np.max(np.abs(inner)))

    def average(self, values: np.ndarray, start: float, end: float) -> float:
        keep = (self.times >= start - 1e-12) & (self.times <= end + 1e-12)
        if np.count_nonzero(keep) < 2:
            raise InvalidParameterError("window", (start, end), "needs at least 2 samples", "diagnostics")
        t = self.times[keep]
        return float(trapezoid(values[keep], t) / (t[-1] - t[0]))

    def averaged_residual(self, start: float, end: float) -> float:
        """|m1bar - (b0 + b Nbar(t-D) - (V_F - V_R) Nbar)| over [start, end]"""
        params = self.params
        m1_bar = self.average(self.m1, start, end)
        drive = params.b0 + params.b * self.average(self.N_delayed, start, end)
        return abs(m1_bar - (drive - params.gap * self.average(self.N, start, end)))

    def window_bound(self, start: float, end: float) -> float:
        """Largest moment-ODE residual on the window, the discretization level of the balance"""
        keep = (self.times >= start - 1e-12) & (self.times <= end + 1e-12)
        keep[0] = keep[-1] = False
        return float(np.max(np.abs(self.residual[keep]))) if np.any(keep) else self.max_residual


def moment_report(result: SimulationResult, params: ModelParams) -> MomentReport:
    series = result.series
    history = result.rate_history()
    times = series.times
    if times.size < 3:
        raise InvalidParameterError("series", times.size, "need at least 3 samples", "diagnostics")
    N_delayed = np.array([history.value_at(t - params.D) for t in times])
    drift = params.b0 + params.b * N_delayed
    dm1 = np.gradient(series.first_moment, times, edge_order=2)
    residual = dm1 - (-series.first_moment + drift * series.mass - params.gap * series.N)
    return MomentReport(times, series.first_moment, residual, params, series.N, N_delayed)


@dataclass(frozen=True)
class PeriodicityReport:
    period: float
    mean_rate: float
    first_moment: float
    rhs: float
    tolerance: float
    lhs_sign: SignSide
    rhs_sign: SignSide
    contradiction: bool
    Phi: Optional[np.ndarray] = None

    @property
    def residual(self) -> float:
        return self.first_moment - self.rhs

    @property
    def within_tolerance(self) -> bool:
        return abs(self.residual) <= self.tolerance

    def row(self) -> List[float]:
        return [
            self.period, self.mean_rate, self.first_moment, self.rhs, self.residual, self.tolerance,
            float(self.within_tolerance)
        ]


def _period_average_density(result: SimulationResult, start: float, end: float) -> Optional[np.ndarray]:
    inside = [s for s in result.snapshots if start - 1e-12 <= s.t <= end + 1e-12]
    if len(inside) < 2:
        return None
    t = np.array([s.t for s in inside])
    stack = np.vstack([s.rho for s in inside])
    return trapezoid(stack, t, axis=0) / (t[-1] - t[0])


def periodicity_obstruction(
    result: SimulationResult,
    params: ModelParams,
    period: float,
    moments: Optional[MomentReport] = None,
    tolerance_factor: float = 2.0
) -> PeriodicityReport:
    """Averaged first-moment balance over the last ``period`` of the run

    Only the final window [t_end - period, t_end] is read; earlier windows
    are not averaged in, since they still carry the start-up transient.
    """
    if params.b0 != 0.0:
        raise InvalidParameterError("b0", params.b0, "periodicity balance needs b0 = 0", "diagnostics")
    times = result.series.times
    length = float(times[-1] - times[0])
    if not 0 < period <= length + 1e-12:
        raise InvalidParameterError("period", period, f"must lie in (0, {length:.6g}]", "diagnostics")
    moments = moments if moments is not None else moment_report(result, params)
    end = float(times[-1])
    start = end - period
    N_bar = moments.average(moments.N, start, end)
    lhs = moments.average(moments.m1, start, end)
    rhs = (params.b - params.gap) * N_bar
    tolerance = tolerance_factor * moments.window_bound(start, end)
    lhs_sign = sign_side(lhs)
    rhs_sign = sign_side(rhs)
    contradiction = params.V_F <= 0 and lhs_sign is not SignSide.POSITIVE and rhs_sign is SignSide.POSITIVE
    return PeriodicityReport(
        period, N_bar, lhs, rhs, tolerance, lhs_sign, rhs_sign, bool(contradiction),
        _period_average_density(result, start, end)
    )


@dataclass(frozen=True)
class PeriodScan:
    reports: List[PeriodicityReport]

    @property
    def best(self) -> PeriodicityReport:
        return min(self.reports, key=lambda r: abs(r.residual))

    @property
    def found(self) -> bool:
        return any(r.within_tolerance for r in self.reports)

    @property
    def contradiction(self) -> bool:
        return all(r.contradiction for r in self.reports)


def period_scan(
    result: SimulationResult,
    params: ModelParams,
    periods: Optional[Sequence[float]] = None
) -> PeriodScan:
    """Obstruction report for each candidate period that fits in the run"""
    logger = logging.getLogger("PeriodScan")
    if periods is None:
        periods = np.linspace(
            DiagnosticsDefaults.PERIOD_MIN, DiagnosticsDefaults.PERIOD_MAX, DiagnosticsDefaults.PERIOD_COUNT
        )
    length = float(result.series.times[-1] - result.series.times[0])
    usable = [float(p) for p in periods if p <= length + 1e-12]
    if len(usable) < len(periods):
        logger.warning(f"{len(periods) - len(usable)} candidate period(s) exceed the run length {length:.6g}")
    if not usable:
        raise InvalidParameterError("periods", length, "no candidate period fits in the run", "diagnostics")
    moments = moment_report(result, params)
    return PeriodScan([periodicity_obstruction(result, params, p, moments) for p in usable])
