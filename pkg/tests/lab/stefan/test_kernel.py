"""Exact panel weights of the heat kernel against adaptive quadrature."""

import numpy as np
import pytest
from scipy.integrate import quad

from src.lab.exceptions import InvalidParameterError
from src.lab.stefan.kernel import (
    fixed_offset_weights, heat_kernel, heat_kernel_dx, kernel_panel_integral, linear_data_evolution,
    linear_data_slope_integral, moving_source_weights
)

TAU = 1.0
PANEL = (0.5, 0.8)
R_NEAR, R_FAR = TAU - PANEL[1], TAU - PANEL[0]


def test_kernel_needs_positive_elapsed_time():
    with pytest.raises(InvalidParameterError):
        heat_kernel(0.0, 1.0, 0.0, 1.0)


def test_kernel_has_unit_mass():
    value, _ = quad(lambda x: float(heat_kernel(x, 0.3, 0.0, 0.0)), -20, 20)
    assert value == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("c", [-3.0, -0.5, 0.7, 4.0])
def test_moving_source_weights(c):
    expected, _ = quad(lambda eta: float(heat_kernel_dx(c * (TAU - eta), TAU, 0.0, eta)), *PANEL)
    assert float(moving_source_weights(c, R_NEAR, R_FAR)) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("d", [-1.0, -0.2, 0.3, 2.0])
def test_fixed_offset_weights(d):
    expected, _ = quad(lambda eta: float(heat_kernel_dx(d, TAU, 0.0, eta)), *PANEL)
    assert float(fixed_offset_weights(d, np.array(R_NEAR), np.array(R_FAR))) == pytest.approx(expected, rel=1e-8)


def test_fixed_offset_weights_up_to_the_singular_end():
    d = 0.4
    expected, _ = quad(lambda eta: float(heat_kernel_dx(d, TAU, 0.0, eta)), PANEL[0], TAU - 1e-12, limit=200)
    value = fixed_offset_weights(d, np.array(0.0), np.array(R_FAR))
    assert float(value) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("d", [0.0, 0.25, -1.5])
def test_kernel_panel_integral(d):
    expected, _ = quad(lambda eta: float(heat_kernel(d, TAU, 0.0, eta)), *PANEL)
    value = kernel_panel_integral(np.array(d), np.array(R_NEAR), np.array(R_FAR))
    assert float(value) == pytest.approx(expected, rel=1e-9)


class TestLinearData:
    nodes = np.linspace(-60.0, 60.0, 241)

    def test_heat_flow_keeps_a_linear_profile(self):
        u = linear_data_evolution(np.array([-0.7, 0.3]), self.nodes, 2.0 * self.nodes + 1.0, 0.5)
        assert u == pytest.approx([-0.4, 1.6], abs=1e-10)

    def test_zero_time_interpolates(self):
        u = linear_data_evolution(np.array([0.25, 100.0]), self.nodes, self.nodes, 0.0)
        assert u == pytest.approx([0.25, 0.0])

    def test_slope_integral_of_linear_profile(self):
        value = linear_data_slope_integral(np.array([0.0, 1.0]), self.nodes, 3.0 * self.nodes, 0.2)
        assert value == pytest.approx([3.0, 3.0], abs=1e-10)
