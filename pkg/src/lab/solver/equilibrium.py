"""Stationary state of the discrete scheme.

The finite-volume step has its own fixed point, a few dv^2 away from the
closed-form profile. Long runs settle onto it, so decay measurements are
taken against it rather than against the sampled formula.
"""
from __future__ import annotations
import logging

import numpy as np

from ..constants import DiagnosticsDefaults, SolverDefaults
from ..exceptions import InvalidParameterError
from ..helpers.timing import StageTimer
from ..model.params import ModelParams
from ..model.steady_state import SteadyState
from .history import FiringRateHistory
from .scheme import FokkerPlanckScheme, SchemeOptions
from .state import DensityState, delayed_drift

logger = logging.getLogger("equilibrium")


def relax_steady_state(
    steady: SteadyState,
    params: ModelParams,
    dt: float,
    mass: float = 1.0,
    options: SchemeOptions = SchemeOptions(),
    cfl_safety: float = SolverDefaults.CFL_SAFETY,
    tol: float = DiagnosticsDefaults.RELAX_TOL,
    max_time: float = DiagnosticsDefaults.RELAX_MAX_TIME,
    check_every: int = DiagnosticsDefaults.RELAX_CHECK_EVERY
) -> SteadyState:
    """Steps the undelayed scheme from ``steady`` until rho stops moving

    The delay does not change stationary states, so D is dropped. Convergence
    is declared when max|drho/dt| over ``check_every`` steps falls below
    tol * max(rho). The returned state carries the scheme's own firing rate.
    """
    if not dt > 0 or not max_time > 0:
        raise InvalidParameterError("dt/max_time", (dt, max_time), "must be > 0", "diagnostics")
    grid = steady.grid
    undelayed = params.with_values(D=0.0)
    scheme = FokkerPlanckScheme(undelayed, grid, options)
    rho = steady.rho_inf * (mass / grid.integrate(steady.rho_inf))
    state = DensityState(rho, 0.0, FiringRateHistory.constant(steady.N_inf, 0.0), rate=steady.N_inf)
    scale = float(np.max(rho))
    reference, t_reference = state.rho.copy(), 0.0
    change = np.inf
    steps = 0
    with StageTimer("steady_state.relax", logger, b=params.b, n_cells=grid.n_cells, N_inf=steady.N_inf):
        while state.t < max_time:
            h = min(dt, cfl_safety * scheme.max_stable_dt(delayed_drift(state, undelayed)))
            state = scheme.step(state, h)
            steps += 1
            if steps % check_every == 0:
                change = float(np.max(np.abs(state.rho - reference))) / (scale * (state.t - t_reference))
                if change < tol:
                    break
                reference, t_reference = state.rho.copy(), state.t
    if change < tol:
        logger.info(
            f"discrete steady state after t={state.t:.4g}: N={state.rate:.10g} "
            f"(closed form {steady.N_inf:.10g})"
        )
    else:
        logger.warning(f"discrete steady state not converged by t={max_time:g}: rate of change {change:.3g}")
    return SteadyState(
        N_inf=state.rate,
        rho_inf=state.rho,
        b_used=steady.b_used,
        mass_residual=abs(grid.integrate(state.rho) - mass),
        grid=grid,
    )
