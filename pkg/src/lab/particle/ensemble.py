from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..config import get_lab_settings
from ..constants import ParticleDefaults
from ..exceptions import ConfigValidationError, InvalidParameterError
from ..helpers.timing import StageTimer
from ..model.grid import Grid
from ..model.params import ModelParams
from ..solver.history import FiringRateHistory


@dataclass
class Ensemble:
    """Potentials of the neuron population with the spike record so far"""
    potentials: np.ndarray
    t: float
    step_times: np.ndarray
    spike_counts: np.ndarray
    bin_times: np.ndarray
    rate_estimate: np.ndarray

    @property
    def n_neurons(self) -> int:
        return int(self.potentials.size)

    @property
    def spike_log(self) -> np.ndarray:
        """One timestamp per threshold crossing"""
        return np.repeat(self.step_times, self.spike_counts)


@dataclass
class ParticleResult:
    ensemble: Ensemble
    bin_width: float
    histogram_edges: np.ndarray
    histogram: np.ndarray

    @property
    def rate_times(self) -> np.ndarray:
        return self.ensemble.bin_times

    @property
    def rates(self) -> np.ndarray:
        return self.ensemble.rate_estimate

    @property
    def max_cascade(self) -> int:
        return int(np.max(self.ensemble.spike_counts)) if self.ensemble.spike_counts.size else 0

    @property
    def noise_level(self) -> float:
        """sqrt(n_bins / n_neurons), the Monte Carlo scale of the histogram L1 error"""
        return math.sqrt(self.histogram.size / self.ensemble.n_neurons)

    def mean_rate(self, start: Optional[float] = None, batches: int = 10) -> Tuple[float, float]:
        """Time-averaged rate after ``start`` (default half the run) with its batch-means standard error"""
        times = self.rate_times
        if start is None:
            start = 0.5 * times[-1]
        tail = self.rates[times > start]
        if tail.size < batches or batches < 2:
            raise InvalidParameterError("rate tail", int(tail.size), f"need >= {max(batches, 2)} bins", "particle")
        means = np.array([chunk.mean() for chunk in np.array_split(tail, batches)])
        return float(tail.mean()), float(means.std(ddof=1) / math.sqrt(batches))

    def rate_rows(self) -> List[List[float]]:
        return np.column_stack([self.rate_times, self.rates]).tolist()

    def histogram_rows(self) -> List[List[float]]:
        edges = self.histogram_edges
        return np.column_stack([edges[:-1], edges[1:], self.histogram]).tolist()

    def spike_rows(self) -> List[List[float]]:
        counts = self.ensemble.spike_counts
        fired = counts > 0
        return np.column_stack([self.ensemble.step_times[fired], counts[fired]]).tolist()


def sample_potentials(rho: np.ndarray, grid: Grid, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of the piecewise-linear density on the grid"""
    grid.check_profile(rho, "particle")
    cdf = cumulative_trapezoid(np.maximum(rho, 0.0), grid.nodes, initial=0.0)
    if not cdf[-1] > 0:
        raise InvalidParameterError("rho0", "mass", "initial density has no mass", "particle")
    return np.interp(rng.random(n) * cdf[-1], cdf, grid.nodes)


def histogram_l1_distance(edges: np.ndarray, density: np.ndarray, grid: Grid, rho: np.ndarray) -> float:
    """L1 distance between a histogram and the bin averages of a grid density, plus PDE mass outside the bins"""
    widths = np.diff(edges)
    total = grid.integrate(rho)
    covered = 0.0
    distance = 0.0
    for i, width in enumerate(widths):
        v = np.linspace(edges[i], edges[i + 1], 17)
        piece = float(trapezoid(np.interp(v, grid.nodes, rho), v))
        covered += piece
        distance += abs(density[i] * width - piece)
    return distance + abs(total - covered)


def memory_estimate(n_neurons: int, n_steps: int) -> int:
    """Bytes for potentials, noise and crossing mask plus the per-step spike counts"""
    return 4 * n_neurons * ParticleDefaults.BYTES_PER_NEURON + 2 * n_steps * 8


class ParticleSimulator:
    """Euler-Maruyama for dV = (-V + b0 + b N(t - D)) dt + sqrt(2a) dW with reset V_F -> V_R"""

    def __init__(self, params: ModelParams, n_neurons: int, dt: float, bin_width: Optional[float] = None):
        if n_neurons < ParticleDefaults.MIN_NEURONS:
            raise InvalidParameterError(
                "n_neurons", n_neurons, f"need at least {ParticleDefaults.MIN_NEURONS}", "particle"
            )
        if not dt > 0:
            raise InvalidParameterError("dt", dt, "must be > 0", "particle")
        bin_width = ParticleDefaults.BANDWIDTH_STEPS * dt if bin_width is None else bin_width
        if not bin_width > dt:
            raise InvalidParameterError("rate_bandwidth", bin_width, f"must exceed dt={dt:g}", "particle")
        self._params = params
        self._n = n_neurons
        self._dt = dt
        self._steps_per_bin = max(1, int(round(bin_width / dt)))
        self._bin_width = self._steps_per_bin * dt
        self._logger = logging.getLogger(self.__class__.__name__)

    @property
    def bin_width(self) -> float:
        return self._bin_width

    def _delayed_rate(self, t: float, rates: List[float], history: FiringRateHistory) -> float:
        """N(t - D) from the prescribed history, or from the last completed bin covering t - D"""
        lag = t - self._params.D
        if lag < 0:
            return history.value_at(lag)
        index = int(math.floor(lag / self._bin_width + 1e-9))
        if index < len(rates):
            return rates[index]
        return rates[-1] if rates else history.value_at(0.0)

    def run(
        self,
        T: float,
        potentials: np.ndarray,
        history: FiringRateHistory,
        rng: np.random.Generator,
        histogram_bins: int = 50,
        histogram_range: Optional[Tuple[float, float]] = None
    ) -> ParticleResult:
        params = self._params
        n_steps = int(math.ceil(T / self._dt - 1e-9))
        budget = get_lab_settings().memory_budget_bytes
        needed = memory_estimate(self._n, n_steps)
        if needed > budget:
            raise ConfigValidationError(
                f"{self._n} neurons over {n_steps} steps need {needed / 2**20:.1f} MB, budget is {budget / 2**20:.1f} MB",
                "particle", "n_neurons"
            )
        V = np.array(potentials, dtype=float)
        noise = math.sqrt(2.0 * params.a * self._dt)
        counts = np.zeros(n_steps, dtype=np.int64)
        rates: List[float] = []
        in_bin = 0

        with StageTimer("particle.simulate", self._logger, n_neurons=V.size, n_steps=n_steps):
            for k in range(n_steps):
                t = k * self._dt
                mu = params.b0 + (params.b * self._delayed_rate(t, rates, history) if params.b != 0.0 else 0.0)
                V += (mu - V) * self._dt + noise * rng.standard_normal(self._n)
                fired = V >= params.V_F
                count = int(np.count_nonzero(fired))
                V[fired] = params.V_R
                counts[k] = count
                in_bin += count
                if (k + 1) % self._steps_per_bin == 0:
                    rates.append(in_bin / (self._n * self._bin_width))
                    in_bin = 0

        step_times = self._dt * np.arange(1, n_steps + 1)
        bin_times = self._bin_width * (np.arange(len(rates)) + 0.5)
        ensemble = Ensemble(V, n_steps * self._dt, step_times, counts, bin_times, np.array(rates))
        lo, hi = histogram_range if histogram_range is not None else (float(np.min(V)), params.V_F)
        density, edges = np.histogram(V, bins=histogram_bins, range=(lo, hi), density=False)
        density = density / (self._n * np.diff(edges))
        self._logger.info(
            f"{int(counts.sum())} spikes from {self._n} neurons, largest cascade {int(counts.max(initial=0))}"
        )
        return ParticleResult(ensemble, self._bin_width, edges, density)


def particle_simulate(
    params: ModelParams,
    n_neurons: int,
    dt: float,
    T: float,
    rho0: np.ndarray,
    grid: Grid,
    history: FiringRateHistory,
    rate_bandwidth: Optional[float] = None,
    seed: int = 0,
    histogram_bins: int = 50
) -> ParticleResult:
    """Seeded particle run started from potentials drawn from rho0"""
    rng = np.random.default_rng(seed)
    simulator = ParticleSimulator(params, n_neurons, dt, rate_bandwidth)
    potentials = sample_potentials(rho0, grid, n_neurons, rng)
    return simulator.run(T, potentials, history, rng, histogram_bins, (grid.v_min, grid.v_max))
