from __future__ import annotations
from typing import Optional

import numpy as np

from ..exceptions import HistoryGapError, InvalidParameterError


class FiringRateHistory:
    """Append-only (time, N) buffer with linear interpolation

    Starts with the prescribed history N0 on [-D, 0]. Samples older than
    ``keep`` time units behind the newest one may be dropped by ``prune``.
    """

    _EPS: float = 1e-12

    def __init__(self, times: np.ndarray, values: np.ndarray, capacity: int = 1024):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size == 0:
            raise InvalidParameterError("history", times.shape, "need matching non-empty 1-D samples", "history")
        if np.any(np.diff(times) <= 0):
            raise InvalidParameterError("history", "times", "must be strictly increasing", "history")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidParameterError("history", "values", "firing rates must be finite and >= 0", "history")
        size = max(capacity, 2 * times.size)
        self._times = np.empty(size)
        self._values = np.empty(size)
        self._times[: times.size] = times
        self._values[: times.size] = values
        self._start = 0
        self._stop = times.size

    @classmethod
    def constant(cls, value: float, D: float, samples: int = 2) -> "FiringRateHistory":
        if D == 0:
            return cls(np.array([0.0]), np.array([value]))
        times = np.linspace(-D, 0.0, max(samples, 2))
        return cls(times, np.full(times.size, value))

    @classmethod
    def from_callable(cls, func, D: float, samples: int = 201) -> "FiringRateHistory":
        if D == 0:
            return cls(np.array([0.0]), np.array([float(func(0.0))]))
        times = np.linspace(-D, 0.0, samples)
        return cls(times, np.array([float(func(t)) for t in times]))

    @property
    def times(self) -> np.ndarray:
        return self._times[self._start: self._stop]

    @property
    def values(self) -> np.ndarray:
        return self._values[self._start: self._stop]

    @property
    def start(self) -> float:
        return float(self._times[self._start])

    @property
    def end(self) -> float:
        return float(self._times[self._stop - 1])

    @property
    def latest(self) -> float:
        return float(self._values[self._stop - 1])

    def maximum(self, until: Optional[float] = None) -> float:
        if until is None:
            return float(np.max(self.values))
        return float(np.max(self.values[self.times <= until + self._EPS]))

    def append(self, t: float, value: float) -> None:
        if not t > self.end:
            raise InvalidParameterError("t", t, f"must exceed the last history time {self.end}", "history")
        if self._stop == self._times.size:
            self._grow()
        self._times[self._stop] = t
        self._values[self._stop] = value
        self._stop += 1

    def _grow(self) -> None:
        live = self._stop - self._start
        size = max(2 * live, 1024)
        times = np.empty(size)
        values = np.empty(size)
        times[:live] = self.times
        values[:live] = self.values
        self._times, self._values = times, values
        self._start, self._stop = 0, live

    def value_at(self, t: float) -> float:
        tol = self._EPS * max(1.0, abs(t))
        if t < self.start - tol or t > self.end + tol:
            raise HistoryGapError(t, self.start, self.end)
        times = self.times
        if times.size == 1:
            return float(self._values[self._start])
        return float(np.interp(t, times, self.values))

    def prune(self, before: float) -> None:
        """Drop samples strictly older than the last sample at or before ``before``"""
        times = self.times
        keep_from = int(np.searchsorted(times, before, side="right")) - 1
        if keep_from > 0:
            self._start += keep_from

    def copy(self) -> "FiringRateHistory":
        return FiringRateHistory(self.times.copy(), self.values.copy(), capacity=self._times.size)

    def covers(self, start: float, end: float) -> bool:
        return self.start <= start + self._EPS * max(1.0, abs(start)) and self.end >= end - self._EPS * max(1.0, abs(end))

    def __len__(self) -> int:
        return self._stop - self._start

    def __repr__(self) -> str:
        return f"FiringRateHistory([{self.start:.6g}, {self.end:.6g}], n={len(self)})"

