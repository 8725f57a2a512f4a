from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..constants import SteadyStateDefaults
from ..exceptions import NumericError


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    panels: int


def adaptive_trapezoid(
    func: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    rtol: float = SteadyStateDefaults.QUADRATURE_RTOL,
    atol: float = 0.0,
    max_levels: int = SteadyStateDefaults.MAX_LEVELS,
    min_levels: int = 4
) -> QuadratureResult:
    """Trapezoid rule with panel doubling and a Richardson check.

    Each level reuses the previous samples and adds the midpoints. The
    Richardson-extrapolated value T_2n + (T_2n - T_n)/3 is returned once
    |T_2n - T_n| drops below rtol*|T_2n| + atol.
    """
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise NumericError(f"non-finite integration bounds [{lo}, {hi}]", "quadrature")
    if hi == lo:
        return QuadratureResult(0.0, 0.0, 0)
    panels = 8
    x = np.linspace(lo, hi, panels + 1)
    fx = _evaluate(func, x)
    h = (hi - lo) / panels
    total = h * (fx.sum() - 0.5 * (fx[0] + fx[-1]))
    for level in range(max_levels):
        h *= 0.5
        midpoints = lo + h * (2 * np.arange(panels) + 1)
        refined = 0.5 * total + h * _evaluate(func, midpoints).sum()
        panels *= 2
        delta = refined - total
        if level + 1 >= min_levels and abs(delta) <= rtol * abs(refined) + atol:
            return QuadratureResult(float(refined + delta / 3.0), float(abs(delta) / 3.0), panels)
        total = refined
    raise NumericError(
        f"trapezoid rule did not reach rtol={rtol:g} on [{lo:.6g}, {hi:.6g}] with {panels} panels",
        "quadrature"
    )


def _evaluate(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    values = np.asarray(func(x), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericError("non-finite integrand value", "quadrature")
    return values
