"""Field reconstruction from the boundary flux."""
from __future__ import annotations
import math

import numpy as np
from scipy.integrate import trapezoid

from ..exceptions import InvalidParameterError
from .coordinates import alpha, tau_of_t
from .kernel import kernel_panel_integral, linear_data_evolution
from .volterra import StefanSegment

CHUNK = 512


def _boundary_at(segment: StefanSegment, tau: float) -> float:
    return float(np.interp(tau, segment.tau, segment.s))


def duhamel_u(segment: StefanSegment, x: np.ndarray, tau: float) -> np.ndarray:
    """u(x, tau) = heat flow of u0 - int M G(., s(eta)) + int M G(., s1(eta)), zero past s(tau)"""
    tol = 1e-12 * max(1.0, abs(segment.end))
    if not segment.start - tol <= tau <= segment.end + tol:
        raise InvalidParameterError(
            "tau", tau, f"must lie in the window [{segment.start:.6g}, {segment.end:.6g}]", "stefan"
        )
    x = np.atleast_1d(np.asarray(x, dtype=float))
    elapsed = tau - segment.start
    if elapsed <= tol:
        return np.where(x <= segment.x0[-1], np.interp(x, segment.x0, segment.u0, left=0.0), 0.0)

    started = segment.tau[:-1] < tau
    r_far = tau - segment.tau[:-1][started]
    r_near = np.maximum(tau - segment.tau[1:][started], 0.0)
    weights = segment.M_mid[started]
    sinks = segment.s_mid[started]
    sources = segment.s1_mid[started]

    u = np.empty_like(x)
    for lo in range(0, x.size, CHUNK):
        part = x[lo:lo + CHUNK]
        heat = linear_data_evolution(part, segment.x0, segment.u0, elapsed)
        sink = kernel_panel_integral(part[:, None] - sinks[None, :], r_near, r_far) @ weights
        source = kernel_panel_integral(part[:, None] - sources[None, :], r_near, r_far) @ weights
        u[lo:lo + CHUNK] = heat - sink + source
    return np.where(x <= _boundary_at(segment, tau), u, 0.0)


def boundary_flux(segment: StefanSegment, tau: float, h: float) -> float:
    """-du/dx at s(tau) from the left, second-order one-sided"""
    s = _boundary_at(segment, tau)
    u = duhamel_u(segment, np.array([s - 2.0 * h, s - h, s]), tau)
    return -(3.0 * u[2] - 4.0 * u[1] + u[0]) / (2.0 * h)


def flux_jump(segment: StefanSegment, tau: float, h: float, reset_voltage: float) -> float:
    """du/dx(s1-) - du/dx(s1+) at the reset image s1 = s + V_R/alpha"""
    s1 = _boundary_at(segment, tau) + reset_voltage / float(alpha(tau))
    u = duhamel_u(segment, s1 + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), tau)
    left = (3.0 * u[2] - 4.0 * u[1] + u[0]) / (2.0 * h)
    right = (-3.0 * u[2] + 4.0 * u[3] - u[4]) / (2.0 * h)
    return left - right


def field_mass(segment: StefanSegment, tau: float, n_points: int = 2001) -> float:
    """integral of u over x <= s(tau) on a grid anchored at the window's left edge"""
    s = _boundary_at(segment, tau)
    width = segment.x0[-1] - segment.x0[0]
    x = np.linspace(s - width - 8.0 * math.sqrt(max(tau - segment.start, 0.0)), s, n_points)
    return float(trapezoid(duhamel_u(segment, x, tau), x))


def density_at(segment: StefanSegment, v: np.ndarray, t: float) -> np.ndarray:
    """rho(v, t) = u(v/alpha + s(tau), tau)/alpha"""
    tau = float(tau_of_t(t))
    a = float(alpha(tau))
    x = np.asarray(v, dtype=float) / a + _boundary_at(segment, tau)
    return duhamel_u(segment, x, tau) / a
