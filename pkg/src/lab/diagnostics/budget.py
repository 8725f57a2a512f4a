from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from ..constants import DiagnosticsDefaults
from ..exceptions import InvalidParameterError
from ..model.steady_state import SteadyState


@dataclass(frozen=True)
class BudgetWindow:
    start: float
    end: float
    integral: float

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def constant(self) -> float:
        """C with int_J N^2 = C (1 + |J|)"""
        return self.integral / (1.0 + self.length)


@dataclass(frozen=True)
class L2BudgetReport:
    total: BudgetWindow
    windows: List[BudgetWindow]

    @property
    def C_fit(self) -> float:
        return max(window.constant for window in self.windows)

    def constants_by_start(self) -> List[Tuple[float, float]]:
        return [(window.start, window.constant) for window in self.windows]

    def rows(self) -> List[List[float]]:
        return [[w.start, w.end, w.integral, w.constant] for w in self.windows]


def _window_integral(times: np.ndarray, N: np.ndarray, start: float, end: float) -> BudgetWindow:
    if not end > start:
        raise InvalidParameterError("window", (start, end), "empty window", "diagnostics")
    if start < times[0] - 1e-12 or end > times[-1] + 1e-12:
        raise InvalidParameterError(
            "window", (start, end), f"outside the series [{times[0]:.6g}, {times[-1]:.6g}]", "diagnostics"
        )
    inside = (times > start) & (times < end)
    t = np.concatenate([[start], times[inside], [end]])
    values = np.interp(t, times, N)
    return BudgetWindow(float(start), float(end), float(trapezoid(values ** 2, t)))


def firing_rate_l2_budget(
    times: np.ndarray,
    N: np.ndarray,
    window: Optional[Tuple[float, float]] = None,
    window_length: Optional[float] = None,
    window_count: int = DiagnosticsDefaults.BUDGET_WINDOW_COUNT
) -> L2BudgetReport:
    """int_J N^2 dt on J and C = int_J N^2/(1 + |J|) over a sliding family of windows.

    The family has ``window_count`` windows of length ``window_length``
    (default a quarter of J) with evenly spaced starts inside J.
    """
    times = np.asarray(times, dtype=float)
    N = np.asarray(N, dtype=float)
    if times.size < 2 or times.shape != N.shape:
        raise InvalidParameterError("series", times.shape, "need at least 2 matching samples", "diagnostics")
    start, end = window if window is not None else (float(times[0]), float(times[-1]))
    total = _window_integral(times, N, start, end)
    length = window_length if window_length is not None else 0.25 * (end - start)
    if not 0 < length <= end - start:
        raise InvalidParameterError("window_length", length, "must lie in (0, |J|]", "diagnostics")
    if window_count < 1:
        raise InvalidParameterError("window_count", window_count, "must be >= 1", "diagnostics")
    starts = np.linspace(start, end - length, window_count)
    windows = [_window_integral(times, N, s, s + length) for s in starts]
    return L2BudgetReport(total, windows)


def initial_weighted_l2(
    rho0: np.ndarray,
    steady: SteadyState,
    V_M: float,
    floor: float = DiagnosticsDefaults.RHO_FLOOR
) -> float:
    """S(b1, V_M) = int_{V_M}^{V_F} rho0^2/rho_inf dv; the integrand vanishes at V_F"""
    grid = steady.grid
    grid.check_profile(rho0, "diagnostics")
    if not grid.v_min <= V_M < grid.v_max:
        raise InvalidParameterError("V_M", V_M, f"must lie in [{grid.v_min:.6g}, {grid.v_max:.6g})", "diagnostics")
    nodes = grid.nodes
    keep = nodes >= V_M
    keep[-1] = False
    rho_inf = steady.rho_inf[keep]
    if np.any(rho_inf < floor):
        return float("inf")
    integrand = np.append(np.asarray(rho0)[keep] ** 2 / rho_inf, 0.0)
    v = np.append(nodes[keep], nodes[-1])
    return float(trapezoid(integrand, v))
