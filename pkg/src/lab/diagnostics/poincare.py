from __future__ import annotations
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..constants import DiagnosticsDefaults
from ..exceptions import NumericError
from ..model.grid import Grid
from ..model.params import ModelParams
from ..model.steady_state import SteadyState, SteadyStateSolver


@dataclass(frozen=True)
class PoincareEstimate:
    gamma: float
    n_cells: int
    gamma_refined: Optional[float] = None

    @property
    def relative_gap(self) -> Optional[float]:
        if self.gamma_refined is None:
            return None
        return abs(self.gamma_refined - self.gamma) / abs(self.gamma_refined)


def weighted_forms(rho_inf: np.ndarray, dv: float, floor: float = DiagnosticsDefaults.RHO_FLOOR):
    """Mass weights and stiffness bands for int rho_inf (h - hbar)^2 and int rho_inf (h')^2.

    Unknowns live on every node but V_F, where rho_inf vanishes; the face next
    to V_F is dropped so h is free there.
    """
    weights = np.asarray(rho_inf[:-1], dtype=float) * dv
    if np.any(weights <= floor * dv):
        index = int(np.argmin(weights))
        raise NumericError(f"singular weight matrix: rho_inf={rho_inf[index]:.3g} at node {index}", "diagnostics")
    face = 0.5 * (rho_inf[:-2] + rho_inf[1:-1]) / dv
    diagonal = np.zeros(weights.size)
    diagonal[:-1] += face
    diagonal[1:] += face
    return weights, diagonal, -face


def poincare_constant(steady: SteadyState, grid: Optional[Grid] = None) -> PoincareEstimate:
    """Second eigenvalue of the generalized problem K h = gamma W h.

    The first eigenvalue is zero with constant eigenvector, so the second one
    is the smallest Rayleigh quotient over mean-free h.
    """
    grid = grid if grid is not None else steady.grid
    grid.check_same(steady.grid, "diagnostics")
    weights, diagonal, off = weighted_forms(steady.rho_inf, grid.dv)
    scale = 1.0 / np.sqrt(weights)
    d = diagonal * scale * scale
    e = off * scale[:-1] * scale[1:]
    values = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 1), lapack_driver="stebz")
    return PoincareEstimate(float(values[1]), grid.n_cells)


def poincare_refinement(params: ModelParams, steady: SteadyState) -> PoincareEstimate:
    """gamma on the steady grid and on the grid with twice the cells"""
    coarse = poincare_constant(steady)
    fine_steady = SteadyStateSolver(params, steady.grid.refined(2)).build(steady.N_inf)
    fine = poincare_constant(fine_steady)
    return PoincareEstimate(coarse.gamma, coarse.n_cells, fine.gamma)
