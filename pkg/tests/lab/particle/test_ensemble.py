"""Euler-Maruyama particle system and its comparison helpers."""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.lab.exceptions import ConfigValidationError, InvalidParameterError
from src.lab.model.steady_state import steady_state_candidates
from src.lab.particle.ensemble import (
    ParticleSimulator, histogram_l1_distance, memory_estimate, particle_simulate, sample_potentials
)
from src.lab.solver.simulator import simulate
from tests.conftest import matching_history


def _run(params, grid, rho0, seed=7, T=1.0, n=2000):
    return particle_simulate(params, n, 1e-3, T, rho0, grid, matching_history(rho0, params, grid), seed=seed)


class TestParticleSimulator:

    def test_rejects_small_population(self, free_params):
        with pytest.raises(InvalidParameterError):
            ParticleSimulator(free_params, 10, 1e-3)

    def test_rejects_bandwidth_below_step(self, free_params):
        with pytest.raises(InvalidParameterError):
            ParticleSimulator(free_params, 1000, 1e-3, bin_width=1e-3)

    def test_default_bandwidth(self, free_params):
        assert ParticleSimulator(free_params, 1000, 1e-3).bin_width == pytest.approx(1e-2)

    def test_memory_budget(self, free_params, small_grid, gaussian_rho0, monkeypatch):
        monkeypatch.setenv("NNLIF_MEMORY_BUDGET_MB", "1")
        assert memory_estimate(1000, 100_000) > 2 ** 20
        with pytest.raises(ConfigValidationError):
            _run(free_params, small_grid, gaussian_rho0, T=100.0, n=1000)


class TestParticleRun:

    def test_seed_reproduces_the_run(self, free_params, small_grid, gaussian_rho0):
        first = _run(free_params, small_grid, gaussian_rho0)
        second = _run(free_params, small_grid, gaussian_rho0)
        assert np.array_equal(first.rates, second.rates)
        assert np.array_equal(first.ensemble.potentials, second.ensemble.potentials)

    def test_records(self, free_params, small_grid, gaussian_rho0):
        result = _run(free_params, small_grid, gaussian_rho0)
        assert result.rates.size == 100
        assert result.ensemble.spike_log.size == int(result.ensemble.spike_counts.sum())
        assert np.all(result.ensemble.potentials < free_params.V_F)
        assert float(np.sum(result.histogram * np.diff(result.histogram_edges))) == pytest.approx(1.0)
        assert len(result.spike_rows()) == np.count_nonzero(result.ensemble.spike_counts)

    def test_mean_rate_needs_enough_bins(self, free_params, small_grid, gaussian_rho0):
        result = _run(free_params, small_grid, gaussian_rho0, T=0.1)
        with pytest.raises(InvalidParameterError):
            result.mean_rate()

    def test_uncoupled_rate_approaches_steady_state(self, free_params, small_grid, gaussian_rho0):
        result = _run(free_params, small_grid, gaussian_rho0, T=6.0, n=10_000)
        rate, stderr = result.mean_rate(start=3.0)
        N_inf = steady_state_candidates(free_params, n_scan=60)[0].N_inf
        assert rate == pytest.approx(N_inf, rel=0.15)
        assert stderr < 0.1 * rate


def test_samples_follow_the_density(small_grid, gaussian_rho0):
    samples = sample_potentials(gaussian_rho0, small_grid, 50_000, np.random.default_rng(1))
    assert samples.mean() == pytest.approx(trapezoid(small_grid.nodes * gaussian_rho0, small_grid.nodes), abs=0.01)
    assert np.all(samples <= small_grid.v_max)


def test_histogram_of_bin_averages_has_no_distance(small_grid, gaussian_rho0):
    edges = small_grid.nodes[::10]
    averages = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        v = np.linspace(lo, hi, 17)
        averages.append(trapezoid(np.interp(v, small_grid.nodes, gaussian_rho0), v) / (hi - lo))
    density = np.array(averages)
    assert histogram_l1_distance(edges, density, small_grid, gaussian_rho0) < 1e-3
    assert histogram_l1_distance(edges, 1.1 * density, small_grid, gaussian_rho0) == pytest.approx(0.1, abs=1e-2)


@pytest.mark.slow
def test_large_population_matches_the_density(free_params, small_grid, gaussian_rho0):
    history = matching_history(gaussian_rho0, free_params, small_grid)
    particles = particle_simulate(free_params, 100_000, 1e-3, 5.0, gaussian_rho0, small_grid, history, seed=11)
    pde = simulate(free_params, small_grid, gaussian_rho0, history, 5.0, 1e-3)
    distance = histogram_l1_distance(
        particles.histogram_edges, particles.histogram, small_grid, pde.snapshots[-1].rho
    )
    assert distance <= 3.0 * particles.noise_level
    rate, stderr = particles.mean_rate(start=2.5)
    N_inf = steady_state_candidates(free_params, n_scan=60)[0].N_inf
    assert stderr < 0.02 * rate
    assert rate == pytest.approx(N_inf, rel=0.1)
