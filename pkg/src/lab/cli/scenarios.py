"""Scenario runners: one strategy per named experiment.

Each runner turns an ExperimentConfig into a ScenarioOutcome (summary
scalars, CSV tables, exit code). Runners never write files themselves.
"""
from __future__ import annotations
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np

from ..enums import ExitCode, HistoryFamily, InitialFamily, NormalizationTarget, Scenario, SummaryKey, TableName
from ..exceptions import ConfigValidationError, SolverError
from ..helpers.logging_utils import LoggingFormatter
from ..maps import StandardMap
from ..model.grid import Grid
from ..model.params import AffineVoltageMap, ModelParams, normalize_problem
from ..model.steady_state import SteadyState, SteadyStateSolver
from ..model.super_solution import SuperSolutionBuilder, verify_super_solution
from ..solver.history import FiringRateHistory
from ..solver.initial import InitialDensityBuilder, InitialHistoryBuilder, consistent_history_value
from ..solver.equilibrium import relax_steady_state
from ..solver.simulator import SimulationOptions, SimulationResult, simulate
from ..diagnostics.budget import firing_rate_l2_budget, initial_weighted_l2
from ..diagnostics.entropy import entropy_identity_check
from ..diagnostics.periodicity import moment_report, period_scan
from ..diagnostics.poincare import poincare_refinement
from ..particle.ensemble import histogram_l1_distance, particle_simulate
from ..stefan.coordinates import alpha, t_of_tau, tau_of_t
from ..stefan.extension import StefanSolution, piecewise_extend
from ..stefan.volterra import fixed_point_M
from .experiment_config import ExperimentConfig
from .writers import ScenarioOutcome, Table


class ExperimentSetup:
    """Grid, initial density and initial history shared by every scenario"""

    def __init__(self, config: ExperimentConfig):
        self._config = config
        self.params = config.params
        self.grid = Grid.build(config.params, config.grid.n_cells, config.grid.v_min)
        self._logger = logging.getLogger(self.__class__.__name__)

    def steady_states(self, params: Optional[ModelParams] = None) -> List[SteadyState]:
        spec = self._config.steady
        solver = SteadyStateSolver(params if params is not None else self.params, self.grid)
        return solver.candidates((spec.N_lo, spec.N_hi), spec.n_scan)

    def initial_density(self) -> np.ndarray:
        spec = self._config.initial
        builder = InitialDensityBuilder(self.grid)
        if spec.family is InitialFamily.GAUSSIAN:
            return builder.gaussian(spec.mean, spec.sd)
        if spec.family is InitialFamily.STEADY_STATE:
            states = self.steady_states(self.params.with_values(b=spec.b1))
            if not states:
                raise ConfigValidationError(f"no steady state for b1={spec.b1:g}", "initial", "b1")
            return builder.from_steady(states[0])
        return builder.from_table(self._config.resolve(spec.path))

    def initial_history(self, rho0: np.ndarray) -> FiringRateHistory:
        spec = self._config.history
        builder = InitialHistoryBuilder(self.params)
        if spec.family is HistoryFamily.TABLE:
            return builder.from_table(self._config.resolve(spec.path))
        value = spec.value if spec.value is not None else consistent_history_value(rho0, self.params, self.grid)
        return builder.constant(value)

    def options(self, frozen_history: bool = False) -> SimulationOptions:
        time, tolerances = self._config.time, self._config.tolerances
        return SimulationOptions(
            snapshot_every=time.snapshot_every,
            cfl_safety=tolerances.cfl_safety,
            consistency_rtol=tolerances.consistency_rtol,
            mass_tolerance=tolerances.mass_tolerance,
            refine_on_blow_up=time.refine_on_blow_up,
            frozen_history=frozen_history,
        )

    def simulate(
        self,
        rho0: np.ndarray,
        history: FiringRateHistory,
        T: Optional[float] = None,
        params: Optional[ModelParams] = None,
        grid: Optional[Grid] = None,
        frozen_history: bool = False
    ) -> SimulationResult:
        time = self._config.time
        return simulate(
            params if params is not None else self.params,
            grid if grid is not None else self.grid,
            rho0,
            history,
            T if T is not None else time.T,
            time.dt,
            time.blow_up_threshold,
            self.options(frozen_history),
        )

    def normalized(
        self, rho0: np.ndarray, target: NormalizationTarget
    ) -> Tuple[ModelParams, Grid, np.ndarray, AffineVoltageMap]:
        """The same problem after the affine voltage map; firing rates are unchanged"""
        params, voltage_map = normalize_problem(self.params, target)
        return params, self.grid.mapped(voltage_map), voltage_map.forward_density(rho0), voltage_map


def snapshot_rows(result: SimulationResult) -> List[List[float]]:
    v = result.grid.nodes
    rows: List[List[float]] = []
    for snapshot in result.snapshots:
        rows += np.column_stack([np.full(v.size, snapshot.t), v, snapshot.rho]).tolist()
    return rows


def series_table(result: SimulationResult) -> Table:
    return Table(["t", "N", "mass", "first_moment", "leaked", "clamped"], result.series.rows())


def run_summary(result: SimulationResult) -> Dict[SummaryKey, object]:
    series = result.series
    summary: Dict[SummaryKey, object] = {
        SummaryKey.T_FINAL: float(series.times[-1]),
        SummaryKey.MASS_DRIFT: series.mass_drift,
        SummaryKey.N_MAX: float(np.max(series.N)),
        SummaryKey.N_FINAL: float(series.N[-1]),
        SummaryKey.BLOW_UP: series.blow_up is not None,
        SummaryKey.CLAMPED_STENCILS: result.clamped_count,
        SummaryKey.BLOW_UP_UNCONFIRMED: len(result.unconfirmed_crossings),
    }
    if series.blow_up is not None:
        record = series.blow_up
        summary.update({
            SummaryKey.BLOW_UP_TIME: record.time,
            SummaryKey.BLOW_UP_REFINED_TIME: record.refined_time,
            SummaryKey.BLOW_UP_EXTRAPOLATED_TIME: record.extrapolated_time,
            SummaryKey.BLOW_UP_CONSISTENT: record.consistent,
        })
    return summary


class IScenarioRunner(ABC):
    """Interface for scenario strategies"""

    def __init__(self):
        self._logger = logging.getLogger(self.__class__.__name__)

    @abstractmethod
    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        pass


class SimulateRunner(IScenarioRunner):
    """Plain forward run; a refinement-consistent blow-up maps to its own exit code"""

    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        setup = ExperimentSetup(config)
        rho0 = setup.initial_density()
        result = setup.simulate(rho0, setup.initial_history(rho0))
        summary = run_summary(result)
        if result.series.times.size >= 3:
            summary[SummaryKey.MOMENT_RESIDUAL_MAX] = moment_report(result, setup.params).max_residual
        blow_up = result.series.blow_up
        exit_code = ExitCode.BLOW_UP if blow_up is not None and blow_up.consistent else ExitCode.SUCCESS
        return ScenarioOutcome(
            summary,
            {
                TableName.SERIES: series_table(result),
                TableName.SNAPSHOTS: Table(["t", "v", "rho"], snapshot_rows(result)),
            },
            exit_code.value,
        )


class SteadyRunner(IScenarioRunner):
    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        setup = ExperimentSetup(config)
        states = setup.steady_states()
        nodes = setup.grid.nodes
        summary: Dict[SummaryKey, object] = {SummaryKey.N_ROOTS: len(states)}
        profiles: List[List[float]] = []
        for index, state in enumerate(states):
            profiles += np.column_stack([np.full(nodes.size, index), nodes, state.rho_inf]).tolist()
        tables = {
            TableName.STEADY_ROOTS: Table(
                ["index", "N_inf", "mass_residual"],
                [[i, s.N_inf, s.mass_residual] for i, s in enumerate(states)]
            ),
            TableName.STEADY_PROFILES: Table(["index", "v", "rho_inf"], profiles),
        }
        if not states:
            self._logger.warning(f"no steady state in [{config.steady.N_lo:g}, {config.steady.N_hi:g}]")
            return ScenarioOutcome(summary, tables)

        summary[SummaryKey.N_INF] = states[0].N_inf
        summary[SummaryKey.MASS_RESIDUAL] = max(s.mass_residual for s in states)
        if config.steady.evolve:
            steady = states[0]
            rho0 = InitialDensityBuilder(setup.grid).from_steady(steady)
            history = InitialHistoryBuilder(setup.params).constant(steady.N_inf)
            result = setup.simulate(rho0, history)
            distance = max(setup.grid.integrate(np.abs(s.rho - rho0)) for s in result.snapshots)
            summary.update(run_summary(result))
            summary[SummaryKey.STEADY_L1_DISTANCE] = distance
            tables[TableName.SERIES] = series_table(result)
        return ScenarioOutcome(summary, tables)


class StefanOracleRunner(IScenarioRunner):
    """Fixed-point flux of the free-boundary problem against the finite-volume run"""

    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        spec = config.stefan
        setup = ExperimentSetup(config)
        rho0 = setup.initial_density()
        history = setup.initial_history(rho0)
        params, grid, rho0_n, voltage_map = setup.normalized(rho0, NormalizationTarget.THRESHOLD)
        result = setup.simulate(rho0_n, history, spec.horizon, params, grid)

        tau_end = float(tau_of_t(result.series.times[-1]))
        sigma = min(spec.sigma, tau_end) if spec.sigma is not None else tau_end
        fixed_point = fixed_point_M(
            grid.nodes, rho0_n, history, params, sigma, spec.tol, spec.tau_step, spec.max_iter
        )
        solution = StefanSolution.from_fixed_point(params, fixed_point)
        if spec.extend_to is not None and tau_of_t(spec.extend_to) > solution.end:
            solution = piecewise_extend(solution, float(tau_of_t(spec.extend_to)), tau_step=spec.tau_step, tol=spec.tol)

        rates = result.rate_history()
        tau = solution.tau
        covered = tau <= tau_end * (1.0 + 1e-12)
        M_pde = np.full(tau.size, np.nan)
        M_pde[covered] = alpha(tau[covered]) ** 2 * np.array([rates.value_at(float(t)) for t in t_of_tau(tau[covered])])
        compared = covered & (tau > 0)
        scale = float(np.max(np.abs(M_pde[compared]))) if np.any(compared) else 0.0
        gap = float(np.max(np.abs(solution.M[compared] - M_pde[compared]))) if np.any(compared) else 0.0
        M_error = gap / scale if scale > 0 else gap

        snapshot = self._comparison_snapshot(result, float(t_of_tau(min(solution.end, tau_end))), spec.compare_t)
        rho_fixed_point = solution.density(grid.nodes, snapshot.t)
        l1_error = grid.integrate(np.abs(rho_fixed_point - snapshot.rho)) / grid.integrate(np.abs(snapshot.rho))

        report = fixed_point.report
        summary: Dict[SummaryKey, object] = {
            SummaryKey.T_FINAL: float(t_of_tau(solution.end)),
            SummaryKey.STEFAN_SIGMA: fixed_point.sigma,
            SummaryKey.STEFAN_ITERATIONS: solution.iterations,
            SummaryKey.STEFAN_M_REL_ERROR: M_error,
            SummaryKey.STEFAN_L1_ERROR: l1_error,
            SummaryKey.STEFAN_PHI1: report.phi1,
            SummaryKey.STEFAN_PHI1_BOUND: report.phi1_bound,
            SummaryKey.STEFAN_BOUNDARY: solution.monotonicity,
            SummaryKey.MASS_DRIFT: result.series.mass_drift,
        }
        self._logger.info(f"stefan oracle {LoggingFormatter.format({k.value: v for k, v in summary.items()})}")
        v = voltage_map.inverse_voltage(grid.nodes)
        stefan_rows = np.column_stack([tau, t_of_tau(tau), solution.M, M_pde, solution.s, solution.s1]).tolist()
        field_rows = np.column_stack([
            np.full(v.size, snapshot.t), v,
            voltage_map.inverse_density(rho_fixed_point), voltage_map.inverse_density(snapshot.rho)
        ]).tolist()
        return ScenarioOutcome(summary, {
            TableName.STEFAN: Table(["tau", "t", "M", "M_pde", "s", "s1"], stefan_rows),
            TableName.STEFAN_FIELD: Table(["t", "v", "rho_fixed_point", "rho_pde"], field_rows),
            TableName.SERIES: series_table(result),
        })

    @staticmethod
    def _comparison_snapshot(result: SimulationResult, latest: float, requested: Optional[float]):
        usable = [s for s in result.snapshots if s.t <= latest * (1.0 + 1e-12)]
        target = latest if requested is None else min(requested, latest)
        return min(usable, key=lambda s: abs(s.t - target))


class EntropyRunner(IScenarioRunner):
    """Entropy identity, decay fit, Poincare constant and L2 budgets of one smooth run"""

    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        spec = config.diagnostics
        setup = ExperimentSetup(config)
        rho0 = setup.initial_density()
        result = setup.simulate(rho0, setup.initial_history(rho0))
        states = setup.steady_states()
        if not states:
            raise SolverError(f"no steady state for b={setup.params.b:g} to measure entropy against", "diagnostics")
        final_N = float(result.series.N[-1])
        steady = min(states, key=lambda s: abs(s.N_inf - final_N))
        discrete = relax_steady_state(
            steady, setup.params, config.time.dt, mass=float(result.series.mass[0]),
            cfl_safety=config.tolerances.cfl_safety
        )

        report = entropy_identity_check(result, discrete, setup.params, tail_fraction=spec.tail_fraction)
        if report.identity_residual > config.tolerances.identity_rtol:
            self._logger.warning(
                f"entropy identity residual {report.identity_residual:.3g} above {config.tolerances.identity_rtol:g}"
            )
        poincare = poincare_refinement(setup.params, steady)
        budget = firing_rate_l2_budget(result.series.times, result.series.N, window_length=spec.budget_window)

        summary = run_summary(result)
        summary.update({
            SummaryKey.N_INF: steady.N_inf,
            SummaryKey.N_INF_DISCRETE: discrete.N_inf,
            SummaryKey.ENTROPY_IDENTITY_RESIDUAL: report.identity_residual,
            SummaryKey.ENTROPY_MAX_DEDT: float(np.max(report.dE_dt_measured)),
            SummaryKey.ENTROPY_SIGN_OK: report.sign_ok(),
            SummaryKey.C0_HYPOTHESIS_OK: report.c0_ok,
            SummaryKey.C0_RATIO: report.c0_ratio,
            SummaryKey.POINCARE_GAMMA: poincare.gamma,
            SummaryKey.POINCARE_GAMMA_REFINED: poincare.gamma_refined,
            SummaryKey.POINCARE_RELATIVE_GAP: poincare.relative_gap,
            SummaryKey.L2_BUDGET_INTEGRAL: budget.total.integral,
            SummaryKey.L2_BUDGET_C_FIT: budget.C_fit,
        })
        if report.fit is not None:
            summary.update({
                SummaryKey.MU_FIT: report.fit.mu,
                SummaryKey.MU_FIT_R2: report.fit.r_squared,
                SummaryKey.MU_FIT_STDERR: report.fit.stderr,
            })
        if spec.V_M is not None:
            reference = steady
            if spec.b1 is not None:
                others = setup.steady_states(setup.params.with_values(b=spec.b1))
                if not others:
                    raise ConfigValidationError(f"no steady state for b1={spec.b1:g}", "diagnostics", "b1")
                reference = others[0]
            summary[SummaryKey.WEIGHTED_L2_INITIAL] = initial_weighted_l2(rho0, reference, spec.V_M)
        return ScenarioOutcome(summary, {
            TableName.ENTROPY: Table(
                ["t", "E", "dEdt_measured", "dissipation", "bracket", "delay", "dEdt_identity"], report.rows()
            ),
            TableName.SERIES: series_table(result),
        })


class PeriodicityScanRunner(IScenarioRunner):
    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        spec = config.diagnostics
        setup = ExperimentSetup(config)
        rho0 = setup.initial_density()
        result = setup.simulate(rho0, setup.initial_history(rho0))
        periods = np.linspace(spec.period_min, spec.period_max, spec.period_count)
        scan = period_scan(result, setup.params, periods)
        best = scan.best
        summary = run_summary(result)
        summary.update({
            SummaryKey.MOMENT_RESIDUAL_MAX: moment_report(result, setup.params).max_residual,
            SummaryKey.PERIOD_MIN_RESIDUAL: abs(best.residual),
            SummaryKey.PERIOD_TOLERANCE: best.tolerance,
            SummaryKey.PERIOD_FOUND: scan.found,
            SummaryKey.PERIOD_LHS_SIGN: best.lhs_sign,
            SummaryKey.PERIOD_RHS_SIGN: best.rhs_sign,
            SummaryKey.PERIOD_CONTRADICTION: scan.contradiction,
        })
        return ScenarioOutcome(summary, {
            TableName.PERIOD_SCAN: Table(
                ["period", "mean_rate", "first_moment", "rhs", "residual", "tolerance", "within_tolerance"],
                [report.row() for report in scan.reports]
            ),
            TableName.SERIES: series_table(result),
        })


class ParticleCompareRunner(IScenarioRunner):
    """Finite-volume run and a seeded particle ensemble from the same initial data"""

    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        spec = config.particle
        setup = ExperimentSetup(config)
        rho0 = setup.initial_density()
        history = setup.initial_history(rho0)
        T = spec.T if spec.T is not None else config.time.T
        result = setup.simulate(rho0, history, T)
        particles = particle_simulate(
            setup.params, spec.n_neurons, spec.dt if spec.dt is not None else config.time.dt, T, rho0,
            setup.grid, history, spec.bandwidth, config.seed, spec.bins
        )
        distance = histogram_l1_distance(
            particles.histogram_edges, particles.histogram, setup.grid, result.snapshots[-1].rho
        )
        mean, stderr = particles.mean_rate()
        summary = run_summary(result)
        summary.update({
            SummaryKey.PARTICLE_L1_DISTANCE: distance,
            SummaryKey.PARTICLE_NOISE_LEVEL: particles.noise_level,
            SummaryKey.PARTICLE_RATE_MEAN: mean,
            SummaryKey.PARTICLE_RATE_STDERR: stderr,
            SummaryKey.PARTICLE_MAX_CASCADE: particles.max_cascade,
        })
        if setup.params.b == 0.0:
            states = setup.steady_states()
            if states:
                summary[SummaryKey.N_INF] = states[0].N_inf
        return ScenarioOutcome(summary, {
            TableName.PARTICLE_RATE: Table(["t", "N_hat"], particles.rate_rows()),
            TableName.PARTICLE_HISTOGRAM: Table(["v_lo", "v_hi", "density"], particles.histogram_rows()),
            TableName.SPIKES: Table(["t", "count"], particles.spike_rows()),
            TableName.SERIES: series_table(result),
        })


class SupersolutionCheckRunner(IScenarioRunner):
    """Builds and verifies the comparison profile, then checks the rate envelope on [0, D)"""

    def run(self, config: ExperimentConfig) -> ScenarioOutcome:
        spec = config.diagnostics
        setup = ExperimentSetup(config)
        rho0 = setup.initial_density()
        history = setup.initial_history(rho0)
        params, grid, rho0_n, voltage_map = setup.normalized(rho0, NormalizationTarget.ZERO_STIMULUS)
        history_max = history.maximum()
        N0_max = spec.N0_max if spec.N0_max is not None else history_max
        if N0_max < history_max:
            self._logger.warning(f"N0_max={N0_max:g} is below the history maximum {history_max:g}")

        profile = SuperSolutionBuilder(params, spec.margin).build(N0_max, grid)
        report = verify_super_solution(profile, params, N0_max, grid, config.tolerances.supersolution)
        summary: Dict[SummaryKey, object] = {
            SummaryKey.SUPERSOLUTION_XI: profile.xi,
            SummaryKey.SUPERSOLUTION_DELTA: profile.delta,
            SummaryKey.SUPERSOLUTION_B: profile.B,
            SummaryKey.SUPERSOLUTION_PASSED: report.passed,
            SummaryKey.SUPERSOLUTION_MIN_RESIDUAL: report.worst_residual,
        }
        tables = {
            TableName.SUPERSOLUTION: Table(
                ["v", "v_normalized", "f", "psi"],
                np.column_stack([
                    voltage_map.inverse_voltage(grid.nodes), grid.nodes, profile.f_profile, profile.psi_profile
                ]).tolist()
            ),
        }
        if params.D > 0:
            factor = profile.domination_factor(rho0_n)
            result = setup.simulate(
                rho0_n, history, min(params.D, config.time.T), params, grid, frozen_history=True
            )
            times = result.series.times
            envelope = profile.envelope(times, factor, params.a)
            inside = times < params.D
            ok = bool(np.all(result.series.N[inside] <= envelope[inside] * (1.0 + 1e-9)))
            summary[SummaryKey.ENVELOPE_ALPHA] = factor
            summary[SummaryKey.ENVELOPE_OK] = ok
            tables[TableName.SERIES] = Table(
                ["t", "N", "envelope"], np.column_stack([times, result.series.N, envelope]).tolist()
            )
        return ScenarioOutcome(summary, tables)


class ScenarioRunnerMap(StandardMap):
    _content: Dict[Scenario, type] = {
        Scenario.SIMULATE: SimulateRunner,
        Scenario.STEADY: SteadyRunner,
        Scenario.STEFAN_ORACLE: StefanOracleRunner,
        Scenario.ENTROPY: EntropyRunner,
        Scenario.PERIODICITY_SCAN: PeriodicityScanRunner,
        Scenario.PARTICLE_COMPARE: ParticleCompareRunner,
        Scenario.SUPERSOLUTION_CHECK: SupersolutionCheckRunner,
    }
    _default = SimulateRunner

    @classmethod
    def create(cls, scenario: Scenario) -> IScenarioRunner:
        return cls.get(scenario)()

