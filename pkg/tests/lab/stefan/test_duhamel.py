"""Field reconstruction from a solved window."""

import numpy as np
import pytest

from src.lab.exceptions import InvalidParameterError
from src.lab.stefan.coordinates import t_of_tau
from src.lab.stefan.duhamel import density_at, duhamel_u


def test_start_of_window_returns_initial_field(short_window, field0):
    x0, u0 = field0
    u = duhamel_u(short_window.segment, x0[::50], 0.0)
    assert u == pytest.approx(u0[::50])


def test_field_vanishes_past_boundary(short_window):
    u = duhamel_u(short_window.segment, np.array([0.1, 1.0]), 0.04)
    assert u.tolist() == [0.0, 0.0]


def test_field_stays_non_negative(short_window):
    u = duhamel_u(short_window.segment, np.linspace(-6.0, -0.1, 119), 0.05)
    assert np.all(u > -1e-6)


def test_rejects_time_outside_window(short_window):
    with pytest.raises(InvalidParameterError):
        duhamel_u(short_window.segment, np.array([-1.0]), 0.2)


def test_density_scales_with_alpha(short_window):
    t = float(t_of_tau(0.03))
    v = np.array([-1.0, -0.5])
    rho = density_at(short_window.segment, v, t)
    alpha = np.exp(-t)
    assert rho == pytest.approx(duhamel_u(short_window.segment, v / alpha, 0.03) / alpha)
