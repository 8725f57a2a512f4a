from __future__ import annotations
from dataclasses import dataclass, asdict, replace
from typing import Any, Dict, Tuple
import math

import numpy as np

from ..enums import NormalizationTarget
from ..exceptions import InvalidParameterError

_LARGEST_BELOW_ONE = math.nextafter(1.0, 0.0)


def scaled_delay(D: float) -> float:
    """Delay after the parabolic time change, 1 - exp(-2D), in [0, 1).

    Finite delays are capped just below one so the invariant holds in floating
    point; an infinite delay maps to the limit value 1.
    """
    if D is None or math.isnan(D) or D < 0:
        raise InvalidParameterError("D", D, "delay must be >= 0", "core-model")
    if math.isinf(D):
        return 1.0
    return min(-math.expm1(-2.0 * D), _LARGEST_BELOW_ONE)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the delayed NNLIF equation

    a: diffusion, b: connectivity, b0: external drift, D: delay,
    V_R / V_F: reset and threshold potentials.
    """
    a: float
    b: float
    b0: float
    D: float
    V_R: float
    V_F: float

    def __post_init__(self):
        for name in ("a", "b", "b0", "D", "V_R", "V_F"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameterError(name, value, "must be a finite number", "core-model")
        if self.a <= 0:
            raise InvalidParameterError("a", self.a, "diffusion must be > 0", "core-model")
        if self.D < 0:
            raise InvalidParameterError("D", self.D, "delay must be >= 0", "core-model")
        if not self.V_R < self.V_F:
            raise InvalidParameterError("V_R", self.V_R, f"reset must be below V_F={self.V_F}", "core-model")

    @property
    def D_bar(self) -> float:
        return scaled_delay(self.D)

    @property
    def gap(self) -> float:
        """V_F - V_R"""
        return self.V_F - self.V_R

    @property
    def is_normalized(self) -> bool:
        return self.a == 1.0 and self.V_F == 0.0

    def drift(self, N: float) -> float:
        """mu = b0 + b*N"""
        return self.b0 + self.b * N

    def with_values(self, **changes: float) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, content: Dict[str, Any]) -> "ModelParams":
        missing = [k for k in ("a", "b", "b0", "D", "V_R", "V_F") if k not in content]
        if missing:
            raise InvalidParameterError("params", sorted(content), f"missing fields {missing}", "core-model")
        return cls(**{k: float(content[k]) for k in ("a", "b", "b0", "D", "V_R", "V_F")})


@dataclass(frozen=True)
class AffineVoltageMap:
    """v_bar = (v - shift) / scale, densities scale by the Jacobian ``scale``

    Firing rates and times are unchanged by the map.
    """
    shift: float
    scale: float
    target: NormalizationTarget = NormalizationTarget.THRESHOLD

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidParameterError("scale", self.scale, "must be > 0", "core-model")

    @property
    def is_identity(self) -> bool:
        return self.shift == 0.0 and self.scale == 1.0

    def forward_voltage(self, v: Any) -> Any:
        return (np.asarray(v, dtype=float) - self.shift) / self.scale if np.ndim(v) else (v - self.shift) / self.scale

    def inverse_voltage(self, v_bar: Any) -> Any:
        return np.asarray(v_bar, dtype=float) * self.scale + self.shift if np.ndim(v_bar) else v_bar * self.scale + self.shift

    def forward_density(self, rho: Any) -> Any:
        return np.asarray(rho, dtype=float) * self.scale

    def inverse_density(self, rho_bar: Any) -> Any:
        return np.asarray(rho_bar, dtype=float) / self.scale

    def map_params(self, params: ModelParams) -> ModelParams:
        root = self.scale
        return ModelParams(
            a=params.a / root ** 2,
            b=params.b / root,
            b0=(params.b0 - self.shift) / root,
            D=params.D,
            V_R=(params.V_R - self.shift) / root,
            V_F=(params.V_F - self.shift) / root,
        )


def normalize_problem(
    params: ModelParams,
    target: NormalizationTarget = NormalizationTarget.THRESHOLD
) -> Tuple[ModelParams, AffineVoltageMap]:
    """Rescale voltages so that a = 1 and either V_F = 0 or b0 = 0.

    The map v -> (v - shift)/sqrt(a) turns the drift -v + b0 + bN into
    -v_bar + (b0 - shift)/sqrt(a) + (b/sqrt(a))N. Shifting by V_F zeroes the
    threshold and leaves a residual stimulus; shifting by b0 removes the
    stimulus and moves the threshold. Both coincide when b0 = V_F.
    """
    root = math.sqrt(params.a)
    shift = params.V_F if target is NormalizationTarget.THRESHOLD else params.b0
    voltage_map = AffineVoltageMap(shift=shift, scale=root, target=target)
    return voltage_map.map_params(params), voltage_map
