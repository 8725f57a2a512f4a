from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Optional
import logging
import math

import numpy as np

from ..constants import StefanDefaults
from ..enums import Monotonicity
from ..exceptions import DecouplingWindowError, InvalidParameterError
from ..model.params import ModelParams
from .coordinates import FluxHistory, alpha, boundary_monotonicity, decoupling_bound, tau_of_t
from .duhamel import density_at, duhamel_u
from .volterra import ContractionReport, FixedPointResult, StefanSegment, VolterraSolver


@dataclass
class StefanSolution:
    """Flux, boundary and window fields on [0, tau_end], possibly across several windows"""
    params: ModelParams
    segments: List[StefanSegment]
    flux: FluxHistory
    reports: List[ContractionReport]
    seam_jumps: List[float] = field(default_factory=list)

    @classmethod
    def from_fixed_point(cls, params: ModelParams, result: FixedPointResult) -> "StefanSolution":
        return cls(params, [result.segment], result.flux, [result.report])

    @property
    def end(self) -> float:
        return self.segments[-1].end

    def _joined(self, name: str) -> np.ndarray:
        parts = [getattr(self.segments[0], name)]
        parts += [getattr(segment, name)[1:] for segment in self.segments[1:]]
        return np.concatenate(parts)

    @property
    def tau(self) -> np.ndarray:
        return self._joined("tau")

    @property
    def M(self) -> np.ndarray:
        return self._joined("M")

    @property
    def s(self) -> np.ndarray:
        return self._joined("s")

    @property
    def s1(self) -> np.ndarray:
        return self.s + self.params.V_R / alpha(self.tau)

    @property
    def N(self) -> np.ndarray:
        return self.M / alpha(self.tau) ** 2

    @property
    def monotonicity(self) -> Monotonicity:
        return boundary_monotonicity(self.s)

    @property
    def iterations(self) -> int:
        return sum(segment.iterations for segment in self.segments)

    def segment_at(self, tau: float) -> StefanSegment:
        for segment in self.segments:
            if tau <= segment.end + 1e-12 * max(1.0, abs(segment.end)):
                return segment
        raise InvalidParameterError("tau", tau, f"solution ends at {self.end:.6g}", "stefan")

    def field_at(self, x: np.ndarray, tau: float) -> np.ndarray:
        return duhamel_u(self.segment_at(tau), x, tau)

    def density(self, v: np.ndarray, t: float) -> np.ndarray:
        return density_at(self.segment_at(float(tau_of_t(t))), v, t)


def _restart_field(segment: StefanSegment, n_points: int):
    """Field at the end of a window on a grid of the same width ending on s"""
    s = segment.s[-1]
    width = segment.x0[-1] - segment.x0[0]
    x = np.linspace(s - width, s, n_points)
    u = duhamel_u(segment, x, segment.end)
    u[-1] = 0.0
    return x, u


def piecewise_extend(
    solution: StefanSolution,
    T2: float,
    window: Optional[float] = None,
    n_points: Optional[int] = None,
    tau_step: float = StefanDefaults.TAU_STEP,
    tol: float = StefanDefaults.TOLERANCE
) -> StefanSolution:
    """Continue a solution on [0, T1] to [0, T2] window by window.

    Each window is at most the decoupling bound, so the boundary on it only
    reads flux that is already known. The field at a seam is rebuilt from the
    previous window and the flux from the left restart is logged as a seam jump.
    """
    params = solution.params
    bound = decoupling_bound(params)
    T1 = solution.end
    if window is None:
        if bound <= 0:
            raise DecouplingWindowError(T1, bound)
        window = T1 / math.ceil(T1 / bound - 1e-12) if T1 > 0 else bound
    if window > bound * (1.0 + 1e-12) or window <= 0:
        raise DecouplingWindowError(window, bound)
    if T1 > 0:
        ratio = T1 / window
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise InvalidParameterError("T1", T1, f"must be a multiple of the window {window:.6g}", "stefan")
    if T2 <= T1:
        return solution

    logger = logging.getLogger("StefanExtension")
    points = n_points if n_points is not None else solution.segments[-1].x0.size
    segments = list(solution.segments)
    reports = list(solution.reports)
    seams = list(solution.seam_jumps)
    flux = solution.flux
    while segments[-1].end < T2 - 1e-12 * max(1.0, T2):
        last = segments[-1]
        x, u = _restart_field(last, points)
        h = x[1] - x[0]
        restart_flux = -(3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
        seams.append(abs(restart_flux - float(last.M[-1])))
        length = min(window, T2 - last.end)
        result = VolterraSolver(params, flux, x, u, tau_step=tau_step, tol=tol).solve(length)
        segments.append(result.segment)
        reports.append(result.report)
        flux = result.flux
        logger.info(f"window [{last.end:.6g}, {result.segment.end:.6g}] seam jump {seams[-1]:.3g}")
    return StefanSolution(params, segments, flux, reports, seams)
