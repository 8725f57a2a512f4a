from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple
import logging

import numpy as np
from sympy import Expr, Symbol, diff, exp, lambdify

from ..constants import SuperSolutionDefaults
from ..enums import Region
from ..exceptions import ConstructionError, InvalidParameterError
from .grid import Grid
from .params import ModelParams

_Evaluators = Tuple[Callable[[np.ndarray], np.ndarray], ...]


@dataclass(frozen=True)
class SuperSolution:
    """Profile f with exp(xi*t)*f a super-solution of the linearised equation

    Derivative profiles hold left limits at the reset node; the one-sided
    jump there and the slope at V_F are stored separately.
    """
    xi: float
    delta: float
    epsilon: float
    B: float
    f_profile: np.ndarray
    psi_profile: np.ndarray
    df_profile: np.ndarray
    d2f_profile: np.ndarray
    reset_jump: float
    boundary_slope: float
    grid: Grid

    @classmethod
    def from_profile(cls, f_values: np.ndarray, grid: Grid, xi: float, delta: float = 1.0,
                     epsilon: float = 0.0, B: float = 0.0) -> "SuperSolution":
        """Wrap an arbitrary node profile; derivatives by one-sided finite differences"""
        grid.check_profile(f_values, "super-solution")
        r, dv = grid.r_index, grid.dv
        if r < 2 or grid.n_cells - r < 2:
            raise InvalidParameterError("grid", grid.signature, "need two nodes on each side of V_R", "super-solution")
        left = np.gradient(f_values[: r + 1], dv, edge_order=2)
        right = np.gradient(f_values[r:], dv, edge_order=2)
        d2_left = np.gradient(left, dv, edge_order=2)
        d2_right = np.gradient(right, dv, edge_order=2)
        return cls(
            xi=xi, delta=delta, epsilon=epsilon, B=B,
            f_profile=np.asarray(f_values, dtype=float),
            psi_profile=np.ones_like(f_values, dtype=float),
            df_profile=np.concatenate([left, right[1:]]),
            d2f_profile=np.concatenate([d2_left, d2_right[1:]]),
            reset_jump=float(right[0] - left[-1]),
            boundary_slope=float(right[-1]),
            grid=grid,
        )

    def domination_factor(self, rho0: np.ndarray) -> float:
        """Smallest alpha with rho0 <= alpha*f on the nodes where f > 0"""
        self.grid.check_profile(rho0, "super-solution")
        mask = self.f_profile > SuperSolutionDefaults.INF_FLOOR
        if not np.any(mask):
            raise ConstructionError("profile vanishes on the whole grid", "super-solution")
        return float(max(np.max(rho0[mask] / self.f_profile[mask]), 0.0))

    def envelope(self, t: np.ndarray, alpha: float, a: float) -> np.ndarray:
        """Firing-rate bound alpha*a*exp(xi*t) of the comparison solution"""
        return alpha * a * np.exp(self.xi * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SuperSolutionReport:
    min_residual: Dict[Region, float]
    reset_jump: float
    boundary_slope: float
    jump_ok: bool
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        residual_ok = all(value >= -self.tolerance for value in self.min_residual.values())
        object.__setattr__(self, "passed", bool(residual_ok and self.jump_ok))

    @property
    def worst_residual(self) -> float:
        return min(self.min_residual.values())


class SuperSolutionBuilder:
    """Two-branch profile glued by a smooth cutoff on the middle interval

    f = 1 below V_R, exp(V_R - v)*psi + (1 - psi)(1 - exp(delta(v - V_F)))/delta
    above it, where psi drops from 1 to 0 on [m, m + epsilon], m = (V_F+V_R)/2.
    """

    def __init__(self, params: ModelParams, margin: float = SuperSolutionDefaults.XI_MARGIN):
        if params.b0 != 0.0:
            raise InvalidParameterError("b0", params.b0, "normalize to b0 = 0 before building", "super-solution")
        self._params = params
        self._margin = margin
        self._logger = logging.getLogger(self.__class__.__name__)

    def drift_bound(self, N0_max: float) -> float:
        """sup of |-v + b*N| over v in [V_R, V_F], N in [0, N0_max] (attained at corners)"""
        p = self._params
        corners = [abs(-v + p.b * N) for v in (p.V_R, p.V_F) for N in (0.0, N0_max)]
        return float(max(corners))

    def _branches(self, delta: float, epsilon: float) -> Dict[str, _Evaluators]:
        p = self._params
        v = Symbol("v", real=True)
        mid = 0.5 * (p.V_F + p.V_R)
        s = (v - mid) / epsilon
        ramp_up = exp(-1 / s)
        ramp_down = exp(-1 / (1 - s))
        psi = ramp_down / (ramp_down + ramp_up)
        reset_branch = exp(p.V_R - v)
        fire_branch = (1 - exp(delta * (v - p.V_F))) / delta
        expressions: Dict[str, Tuple[Expr, Expr]] = {
            "reset": (reset_branch, 1 + 0 * v),
            "transition": (reset_branch * psi + (1 - psi) * fire_branch, psi),
            "fire": (fire_branch, 0 * v),
        }
        return {
            name: tuple(lambdify(v, e, modules="numpy") for e in (f, diff(f, v), diff(f, v, 2), cutoff))
            for name, (f, cutoff) in expressions.items()
        }

    def _evaluate(self, v: np.ndarray, delta: float, epsilon: float) -> Tuple[np.ndarray, ...]:
        p = self._params
        mid = 0.5 * (p.V_F + p.V_R)
        branches = self._branches(delta, epsilon)
        out = [np.zeros_like(v) for _ in range(4)]
        out[0][:] = 1.0
        out[3][:] = 1.0
        masks = {
            "reset": (v > p.V_R) & (v <= mid),
            "transition": (v > mid) & (v < mid + epsilon),
            "fire": v >= mid + epsilon,
        }
        for name, mask in masks.items():
            if not np.any(mask):
                continue
            for k, evaluator in enumerate(branches[name]):
                out[k][mask] = np.broadcast_to(evaluator(v[mask]), v[mask].shape)
        return tuple(out)

    def build(self, N0_max: float, grid: Grid) -> SuperSolution:
        p = self._params
        if N0_max < 0:
            raise InvalidParameterError("N0_max", N0_max, "must be >= 0", "super-solution")
        B = self.drift_bound(N0_max)
        delta = max(1.0, B / p.a)
        epsilon = 0.25 * p.gap
        nodes = grid.nodes
        f, df, d2f, psi = self._evaluate(nodes, delta, epsilon)

        samples = np.union1d(np.linspace(p.V_R, 0.5 * (p.V_F + p.V_R) + epsilon, 4001)[1:-1],
                             nodes[(nodes > p.V_R) & (nodes < 0.5 * (p.V_F + p.V_R) + epsilon)])
        f_mid, df_mid, d2f_mid, _ = self._evaluate(samples, delta, epsilon)
        inf_f = float(np.min(f_mid))
        if not inf_f > SuperSolutionDefaults.INF_FLOOR:
            raise ConstructionError(f"inf f on the middle interval is {inf_f:.3g}", "super-solution")
        demand = float(np.max(B * np.abs(df_mid) + p.a * np.abs(d2f_mid)))
        xi = (1.0 + self._margin) * (1.0 + demand / inf_f)
        self._logger.info(f"super-solution B={B:.6g} delta={delta:.6g} xi={xi:.6g}")
        return SuperSolution(
            xi=xi, delta=delta, epsilon=epsilon, B=B,
            f_profile=f, psi_profile=psi, df_profile=df, d2f_profile=d2f,
            reset_jump=-1.0, boundary_slope=-1.0, grid=grid,
        )


def build_super_solution(params: ModelParams, N0_max: float, grid: Grid) -> SuperSolution:
    return SuperSolutionBuilder(params).build(N0_max, grid)


def verify_super_solution(
    ss: SuperSolution,
    params: ModelParams,
    N0_max: float,
    grid: Grid,
    tolerance: float = SuperSolutionDefaults.TOLERANCE
) -> SuperSolutionReport:
    """Minimum of (xi-1)f + (-v+bN)f' - af'' per region for N in {0, N0_max}"""
    ss.grid.check_same(grid, "super-solution")
    v = grid.nodes
    mid = 0.5 * (params.V_F + params.V_R)
    regions = {
        Region.BELOW_RESET: np.arange(v.size) <= grid.r_index,
        Region.MIDDLE: (np.arange(v.size) > grid.r_index) & (v < mid + ss.epsilon),
        Region.RIGHT: (np.arange(v.size) > grid.r_index) & (v >= mid + ss.epsilon),
    }
    minima: Dict[Region, float] = {}
    for region, mask in regions.items():
        if not np.any(mask):
            continue
        worst = np.inf
        for N in (0.0, N0_max):
            residual = (
                (ss.xi - 1.0) * ss.f_profile[mask]
                + (-v[mask] + params.b * N) * ss.df_profile[mask]
                - params.a * ss.d2f_profile[mask]
            )
            worst = min(worst, float(np.min(residual)))
        minima[region] = worst
    jump_ok = ss.reset_jump <= ss.boundary_slope + tolerance and ss.boundary_slope < -tolerance
    return SuperSolutionReport(minima, ss.reset_jump, ss.boundary_slope, bool(jump_ok), tolerance)
