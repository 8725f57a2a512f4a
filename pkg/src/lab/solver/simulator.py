from __future__ import annotations
from dataclasses import dataclass, field, replace
from typing import List, Optional
import logging
import math

import numpy as np

from ..constants import SolverDefaults
from ..exceptions import InvalidParameterError
from ..helpers.timing import StageTimer
from ..model.grid import Grid
from ..model.params import ModelParams
from .history import FiringRateHistory
from .initial import check_initial_consistency
from .scheme import FokkerPlanckScheme, SchemeOptions
from .state import DensityState, delayed_drift, first_moment, mass


@dataclass(frozen=True)
class BlowUpRecord:
    """Threshold crossing of N with its refinement check

    consistent is True when the run on the refined grid with half the step
    crossed within the relative window of the original crossing time.
    """
    time: float
    threshold: float
    consistent: bool
    refined_time: Optional[float]
    extrapolated_time: Optional[float]


@dataclass
class FiringRateSeries:
    times: np.ndarray
    N: np.ndarray
    mass: np.ndarray
    first_moment: np.ndarray
    leaked: np.ndarray
    clamped: np.ndarray
    blow_up: Optional[BlowUpRecord] = None

    def __post_init__(self):
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise InvalidParameterError("series", "times", "must be strictly increasing", "fp-solver")
        if np.any(self.N < 0):
            raise InvalidParameterError("series", "N", "firing rates must be >= 0", "fp-solver")

    @property
    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0]))) if self.mass.size else 0.0

    def rows(self) -> List[List[float]]:
        return np.column_stack([self.times, self.N, self.mass, self.first_moment, self.leaked, self.clamped]).tolist()


@dataclass(frozen=True)
class Snapshot:
    t: float
    rho: np.ndarray


@dataclass(frozen=True)
class SimulationOptions:
    snapshot_every: float = SolverDefaults.SNAPSHOT_EVERY
    checkpoint_every: float = SolverDefaults.CHECKPOINT_EVERY
    cfl_safety: float = SolverDefaults.CFL_SAFETY
    consistency_rtol: float = SolverDefaults.CONSISTENCY_RTOL
    refinement_consistency: float = SolverDefaults.REFINEMENT_CONSISTENCY
    extrapolation_points: int = SolverDefaults.EXTRAPOLATION_POINTS
    mass_tolerance: float = SolverDefaults.MASS_TOLERANCE
    frozen_history: bool = False
    refine_on_blow_up: bool = True
    check_initial_data: bool = True
    scheme: SchemeOptions = field(default_factory=SchemeOptions)


@dataclass
class SimulationResult:
    params: ModelParams
    grid: Grid
    snapshots: List[Snapshot]
    series: FiringRateSeries
    initial_history: FiringRateHistory
    final_state: DensityState
    warnings: List[str] = field(default_factory=list)
    unconfirmed_crossings: List[BlowUpRecord] = field(default_factory=list)

    @property
    def clamped_count(self) -> int:
        return self.final_state.clamped

    def rate_history(self) -> FiringRateHistory:
        """N on [-D, t_end]: the prescribed history followed by the computed series"""
        times = self.initial_history.times
        values = self.initial_history.values
        later = self.series.times > times[-1]
        return FiringRateHistory(
            np.concatenate([times, self.series.times[later]]),
            np.concatenate([values, self.series.N[later]]),
        )


class _Recorder:
    def __init__(self):
        self.times: List[float] = []
        self.N: List[float] = []
        self.mass: List[float] = []
        self.moment: List[float] = []
        self.leaked: List[float] = []
        self.clamped: List[int] = []

    def add(self, state: DensityState, rate: float, grid: Grid) -> None:
        self.times.append(state.t)
        self.N.append(rate)
        self.mass.append(mass(state.rho, grid))
        self.moment.append(first_moment(state.rho, grid))
        self.leaked.append(state.leaked)
        self.clamped.append(state.clamped)

    def series(self, blow_up: Optional[BlowUpRecord] = None) -> FiringRateSeries:
        return FiringRateSeries(
            np.array(self.times), np.array(self.N), np.array(self.mass),
            np.array(self.moment), np.array(self.leaked), np.array(self.clamped), blow_up
        )


class Simulator:
    """Runs the delayed equation to a horizon with threshold-based blow-up detection"""

    def __init__(self, params: ModelParams, grid: Grid, options: SimulationOptions = SimulationOptions()):
        self._params = params
        self._grid = grid
        self._options = options
        self._scheme = FokkerPlanckScheme(params, grid, options.scheme)
        self._logger = logging.getLogger(self.__class__.__name__)

    def _advance_to(self, scheme: FokkerPlanckScheme, state: DensityState, target: float) -> DensityState:
        """Sub-steps up to ``target`` keeping the drift step inside the stability limit"""
        while target - state.t > 1e-12 * max(1.0, abs(target)):
            remaining = target - state.t
            mu = delayed_drift(state, self._params)
            h = min(remaining, self._options.cfl_safety * scheme.max_stable_dt(mu))
            if remaining - h < 1e-12 * max(1.0, target):
                h = remaining
            state = scheme.step(state, h)
        return state

    def run(
        self,
        rho0: np.ndarray,
        history0: FiringRateHistory,
        T: float,
        dt: float,
        blow_up_threshold: float = SolverDefaults.BLOW_UP_THRESHOLD
    ) -> SimulationResult:
        if not T > 0 or not dt > 0:
            raise InvalidParameterError("T/dt", (T, dt), "must be > 0", "fp-solver")
        if self._options.check_initial_data:
            check_initial_consistency(
                rho0, history0, self._params, self._grid, self._options.consistency_rtol,
                self._options.mass_tolerance
            )
        state = DensityState(
            np.asarray(rho0, dtype=float).copy(), 0.0, history0.copy(), frozen=self._options.frozen_history,
            rate=history0.value_at(0.0)
        )
        grid = self._grid
        recorder = _Recorder()
        recorder.add(state, state.rate, grid)
        snapshots = [Snapshot(0.0, state.rho.copy())]
        n_steps = int(math.ceil(T / dt - 1e-9))
        snapshot_stride = max(1, int(round(self._options.snapshot_every / dt)))
        checkpoint_stride = max(1, int(round(self._options.checkpoint_every / dt)))
        checkpoint = state.copy()
        blow_up: Optional[BlowUpRecord] = None
        unconfirmed: List[BlowUpRecord] = []
        armed = True
        warnings: List[str] = []

        with StageTimer(
            "simulate", self._logger, T=T, dt=dt, n_cells=grid.n_cells, b=self._params.b, D=self._params.D
        ):
            for k in range(1, n_steps + 1):
                state = self._advance_to(self._scheme, state, min(k * dt, T))
                rate = state.rate
                recorder.add(state, rate, grid)
                if rate <= blow_up_threshold:
                    armed = True
                elif armed:
                    record = self._confirm_blow_up(checkpoint, state.t, dt, blow_up_threshold, recorder)
                    if record.consistent:
                        blow_up = record
                        snapshots.append(Snapshot(state.t, state.rho.copy()))
                        break
                    # re-checked only after N drops back below the threshold
                    armed = False
                    unconfirmed.append(record)
                    warnings.append(
                        f"threshold crossed at t={state.t:.6g} but refinement did not confirm it "
                        f"(refined crossing {record.refined_time}); resolution too coarse, run continues"
                    )
                if k % snapshot_stride == 0 or k == n_steps:
                    snapshots.append(Snapshot(state.t, state.rho.copy()))
                if k % checkpoint_stride == 0:
                    checkpoint = state.copy()

        if state.clamped:
            warnings.append(f"{state.clamped} negative firing rate(s) clamped to zero")
        for message in warnings:
            self._logger.warning(message)
        return SimulationResult(
            self._params, grid, snapshots, recorder.series(blow_up), history0.copy(), state, warnings, unconfirmed
        )

    def _confirm_blow_up(
        self,
        checkpoint: DensityState,
        crossing: float,
        dt: float,
        threshold: float,
        recorder: _Recorder
    ) -> BlowUpRecord:
        extrapolated = self._extrapolate(np.array(recorder.times), np.array(recorder.N))
        if not self._options.refine_on_blow_up:
            return BlowUpRecord(crossing, threshold, False, None, extrapolated)
        refined_time = self._refined_crossing(checkpoint, crossing, dt, threshold)
        consistent = (
            refined_time is not None
            and abs(refined_time - crossing) < self._options.refinement_consistency * crossing
        )
        self._logger.info(
            f"blow-up check: crossing t={crossing:.6g}, refined t={refined_time}, consistent={consistent}"
        )
        return BlowUpRecord(crossing, threshold, bool(consistent), refined_time, extrapolated)

    def _refined_crossing(
        self, checkpoint: DensityState, crossing: float, dt: float, threshold: float
    ) -> Optional[float]:
        fine_grid = self._grid.refined(2)
        fine_scheme = FokkerPlanckScheme(self._params, fine_grid, self._options.scheme)
        rho = fine_grid.interpolate_from(self._grid, checkpoint.rho)
        rho *= mass(checkpoint.rho, self._grid) / mass(rho, fine_grid)
        state = DensityState(
            rho, checkpoint.t, checkpoint.history.copy(), checkpoint.frozen, rate=checkpoint.rate
        )
        half = 0.5 * dt
        horizon = crossing + max(self._options.refinement_consistency * crossing, 2 * dt)
        with StageTimer("simulate.refined_window", self._logger, start=checkpoint.t, end=horizon):
            k = 0
            while state.t < horizon:
                k += 1
                state = self._advance_to(fine_scheme, state, checkpoint.t + k * half)
                if state.rate > threshold:
                    return state.t
        return None

    def _extrapolate(self, times: np.ndarray, rates: np.ndarray) -> Optional[float]:
        """Zero of a linear fit of 1/N over the final samples"""
        positive = rates > 0
        times, rates = times[positive], rates[positive]
        points = min(self._options.extrapolation_points, times.size)
        if points < 3:
            return None
        slope, intercept = np.polyfit(times[-points:], 1.0 / rates[-points:], 1)
        if slope >= 0:
            return None
        return float(-intercept / slope)


def simulate(
    params: ModelParams,
    grid: Grid,
    rho0: np.ndarray,
    N0_history: FiringRateHistory,
    T: float,
    dt: float,
    blow_up_threshold: float = SolverDefaults.BLOW_UP_THRESHOLD,
    options: SimulationOptions = SimulationOptions(),
    frozen_history: Optional[bool] = None
) -> SimulationResult:
    if frozen_history is not None:
        options = replace(options, frozen_history=frozen_history)
    return Simulator(params, grid, options).run(rho0, N0_history, T, dt, blow_up_threshold)
