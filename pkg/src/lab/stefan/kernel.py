"""Heat kernel G(x, tau, xi, eta) = exp(-(x-xi)^2 / 4(tau-eta)) / sqrt(4 pi (tau-eta))
and its exact integrals over time panels and piecewise-linear data."""
import math

import numpy as np
from scipy.special import erf, erfc

from ..exceptions import InvalidParameterError

_SQRT_PI = math.sqrt(math.pi)


def _elapsed(tau, eta) -> np.ndarray:
    r = np.asarray(tau, dtype=float) - np.asarray(eta, dtype=float)
    if np.any(r <= 0):
        raise InvalidParameterError("tau - eta", float(np.min(r)), "kernel needs tau > eta", "stefan")
    return r


def heat_kernel(x, tau, xi, eta) -> np.ndarray:
    r = _elapsed(tau, eta)
    d = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
    return np.exp(-d * d / (4.0 * r)) / np.sqrt(4.0 * math.pi * r)


def heat_kernel_dx(x, tau, xi, eta) -> np.ndarray:
    r = _elapsed(tau, eta)
    d = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
    return -d / (2.0 * r) * np.exp(-d * d / (4.0 * r)) / np.sqrt(4.0 * math.pi * r)


def moving_source_weights(c: np.ndarray, r_near: np.ndarray, r_far: np.ndarray) -> np.ndarray:
    """int of dG/dx over one panel when x - xi(eta) = c * (tau - eta)

    ``r_near`` and ``r_far`` are tau - eta at the panel ends, r_near < r_far.
    """
    c = np.asarray(c, dtype=float)
    scale = 0.5 * np.abs(c)
    return -0.5 * np.sign(c) * (erf(scale * np.sqrt(r_far)) - erf(scale * np.sqrt(r_near)))


def fixed_offset_weights(d: np.ndarray, r_near: np.ndarray, r_far: np.ndarray) -> np.ndarray:
    """int of dG/dx over one panel when x - xi(eta) = d is frozen

    r_near may be zero, which gives the limiting erf value 1 for d != 0.
    """
    d = np.asarray(d, dtype=float)
    abs_d = np.abs(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.where(r_near > 0, erf(abs_d / (2.0 * np.sqrt(np.where(r_near > 0, r_near, 1.0)))), 1.0)
        near = np.where(abs_d == 0, 0.0, near)
    far = erf(abs_d / (2.0 * np.sqrt(r_far)))
    return -0.5 * np.sign(d) * (near - far)


def _time_antiderivative(d: np.ndarray, r: np.ndarray) -> np.ndarray:
    """A(r) with dA/dr = sqrt(4 pi) G, A(0) = 0"""
    abs_d = np.abs(d)
    safe = np.where(r > 0, r, 1.0)
    value = 2.0 * np.sqrt(safe) * np.exp(-abs_d ** 2 / (4.0 * safe)) - abs_d * _SQRT_PI * erfc(abs_d / (2.0 * np.sqrt(safe)))
    return np.where(r > 0, value, 0.0)


def kernel_panel_integral(d: np.ndarray, r_near: np.ndarray, r_far: np.ndarray) -> np.ndarray:
    """int of G over one panel with frozen offset d"""
    return (_time_antiderivative(d, r_far) - _time_antiderivative(d, r_near)) / math.sqrt(4.0 * math.pi)


def _cell_erf(x: np.ndarray, nodes: np.ndarray, r) -> np.ndarray:
    root = np.sqrt(np.broadcast_to(np.asarray(r, dtype=float), x.shape))
    return erf((x[:, None] - nodes[None, :]) / (2.0 * root[:, None]))


def linear_data_slope_integral(x: np.ndarray, nodes: np.ndarray, values: np.ndarray, r) -> np.ndarray:
    """int G(x, r, xi, 0) u0'(xi) dxi for piecewise-linear u0, zero outside the nodes

    ``r`` is the elapsed time, either shared or one per evaluation point.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    slopes = np.diff(values) / np.diff(nodes)
    E = _cell_erf(x, nodes, r)
    return 0.5 * (E[:, :-1] - E[:, 1:]) @ slopes


def linear_data_evolution(x: np.ndarray, nodes: np.ndarray, values: np.ndarray, r: float) -> np.ndarray:
    """Heat flow over time r of piecewise-linear u0 on the whole line"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if r <= 0:
        return np.interp(x, nodes, values, left=0.0, right=0.0)
    slopes = np.diff(values) / np.diff(nodes)
    E = _cell_erf(x, nodes, r)
    weights = 0.5 * (E[:, :-1] - E[:, 1:])
    offsets = x[:, None] - nodes[None, :-1]
    gauss = np.exp(-(x[:, None] - nodes[None, :]) ** 2 / (4.0 * r))
    tilt = math.sqrt(r / math.pi) * (gauss[:, :-1] - gauss[:, 1:])
    return np.sum((values[None, :-1] + slopes[None, :] * offsets) * weights + slopes[None, :] * tilt, axis=1)
