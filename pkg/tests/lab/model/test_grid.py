"""Unit tests for the node grid."""

import numpy as np
import pytest

from src.lab.exceptions import GridMismatchError, InvalidParameterError
from src.lab.model.grid import Grid


class TestGridBuild:

    def test_reset_lands_on_a_node(self, free_params):
        grid = Grid.build(free_params, n_cells=300)
        assert grid.reset_voltage == pytest.approx(free_params.V_R, abs=1e-12)
        assert grid.nodes[-1] == pytest.approx(free_params.V_F)
        assert grid.consistent_with(free_params)

    def test_requested_left_boundary_is_honoured_within_a_cell(self, free_params):
        grid = Grid.build(free_params, n_cells=100, v_min=-5.0)
        assert abs(grid.v_min + 5.0) < grid.dv

    def test_left_boundary_must_sit_below_reset(self, free_params):
        with pytest.raises(InvalidParameterError):
            Grid.build(free_params, n_cells=100, v_min=-0.5)

    def test_too_few_cells(self, free_params):
        with pytest.raises(InvalidParameterError):
            Grid.build(free_params, n_cells=2)

    def test_refined_keeps_reset_node(self, small_grid):
        fine = small_grid.refined(2)
        assert fine.n_cells == 2 * small_grid.n_cells
        assert fine.reset_voltage == pytest.approx(small_grid.reset_voltage)
        assert fine.dv == pytest.approx(0.5 * small_grid.dv)


class TestGridProfiles:

    def test_integrate_constant(self, small_grid):
        ones = np.ones(small_grid.n_cells + 1)
        assert small_grid.integrate(ones) == pytest.approx(small_grid.v_max - small_grid.v_min)

    def test_check_profile_shape(self, small_grid):
        with pytest.raises(GridMismatchError):
            small_grid.check_profile(np.zeros(small_grid.n_cells), "test")

    def test_check_same(self, small_grid):
        with pytest.raises(GridMismatchError):
            small_grid.check_same(small_grid.refined(2), "test")

    def test_interpolate_from_coarser_grid(self, small_grid):
        fine = small_grid.refined(2)
        values = np.sin(small_grid.nodes)
        resampled = fine.interpolate_from(small_grid, values)
        assert resampled[::2] == pytest.approx(values)
