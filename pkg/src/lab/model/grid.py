from __future__ import annotations
from dataclasses import dataclass
from typing import Optional, Tuple
import math

import numpy as np
from scipy.integrate import trapezoid

from ..constants import GridDefaults
from ..exceptions import InvalidParameterError, GridMismatchError
from .params import ModelParams, AffineVoltageMap


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on [v_min, V_F] with the reset potential on node r_index

    Node i carries the control volume [v_i - dv/2, v_i + dv/2], so V_R sits at
    the centre of control volume r_index. Densities vanish on both end nodes.
    """
    v_min: float
    v_max: float
    n_cells: int
    r_index: int

    def __post_init__(self):
        if self.n_cells < GridDefaults.MIN_CELLS:
            raise InvalidParameterError(
                "n_cells", self.n_cells, f"need at least {GridDefaults.MIN_CELLS} cells", "grid"
            )
        if not self.v_min < self.v_max:
            raise InvalidParameterError("v_min", self.v_min, f"must be below v_max={self.v_max}", "grid")
        if not 0 < self.r_index < self.n_cells:
            raise InvalidParameterError("r_index", self.r_index, "reset must be an interior node", "grid")

    @classmethod
    def build(
        cls,
        params: ModelParams,
        n_cells: int = GridDefaults.N_CELLS,
        v_min: Optional[float] = None,
        n_guess: float = GridDefaults.N_GUESS
    ) -> "Grid":
        """Grid whose spacing divides V_F - V_R exactly.

        The requested v_min (default V_F - 12*sqrt(a) - |b|*n_guess, never above
        V_R) is moved by less than one cell so that V_R lands on a node.
        """
        if n_cells < GridDefaults.MIN_CELLS:
            raise InvalidParameterError("n_cells", n_cells, f"need at least {GridDefaults.MIN_CELLS} cells", "grid")
        if v_min is None:
            length = GridDefaults.TRUNCATION_SIGMAS * math.sqrt(params.a) + abs(params.b) * n_guess
            v_min = min(params.V_F - length, params.V_R - params.gap)
        if not v_min < params.V_R:
            raise InvalidParameterError("v_min", v_min, f"must be below V_R={params.V_R}", "grid")
        k = int(round(n_cells * params.gap / (params.V_F - v_min)))
        k = min(max(k, 1), n_cells - 1)
        dv = params.gap / k
        return cls(v_min=params.V_F - n_cells * dv, v_max=params.V_F, n_cells=n_cells, r_index=n_cells - k)

    @property
    def dv(self) -> float:
        return (self.v_max - self.v_min) / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return self.v_min + self.dv * np.arange(self.n_cells + 1)

    @property
    def faces(self) -> np.ndarray:
        """Midpoints between consecutive nodes"""
        return self.v_min + self.dv * (np.arange(self.n_cells) + 0.5)

    @property
    def reset_voltage(self) -> float:
        return self.v_min + self.dv * self.r_index

    @property
    def signature(self) -> Tuple[float, float, int, int]:
        return (self.v_min, self.v_max, self.n_cells, self.r_index)

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid rule over the nodes"""
        return float(trapezoid(values, dx=self.dv))

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.v_min, self.v_max, self.n_cells * factor, self.r_index * factor)

    def mapped(self, voltage_map: AffineVoltageMap) -> "Grid":
        return Grid(
            float(voltage_map.forward_voltage(self.v_min)),
            float(voltage_map.forward_voltage(self.v_max)),
            self.n_cells,
            self.r_index,
        )

    def interpolate_from(self, other: "Grid", values: np.ndarray) -> np.ndarray:
        """Resample a node profile of ``other`` onto this grid, zero outside"""
        return np.interp(self.nodes, other.nodes, values, left=0.0, right=0.0)

    def check_profile(self, values: np.ndarray, component: str) -> None:
        if np.shape(values) != (self.n_cells + 1,):
            raise GridMismatchError(self.n_cells + 1, np.shape(values), component)

    def check_same(self, other: "Grid", component: str) -> None:
        if not np.allclose(self.signature, other.signature, rtol=1e-12, atol=1e-12):
            raise GridMismatchError(self.signature, other.signature, component)

    def consistent_with(self, params: ModelParams) -> bool:
        return (
            math.isclose(self.v_max, params.V_F, rel_tol=1e-12, abs_tol=1e-12)
            and math.isclose(self.reset_voltage, params.V_R, rel_tol=1e-9, abs_tol=1e-9)
        )
