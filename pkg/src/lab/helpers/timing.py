"""Wall-clock accounting for the expensive stages of a run.

Root scans, simulations, Picard solves and particle runs each run inside a
StageTimer. The log line carries the stage name and optional context
(parameters, window bounds, sizes) shortened by LoggingFormatter:

    with StageTimer("stefan.fixed_point", self._logger, sigma=sigma, nodes=x0.size):
        ...

Stages faster than ``min_ms`` drop to DEBUG so refinement windows and
per-window solves do not flood INFO.
"""
import logging
import time
from types import TracebackType
from typing import Any, Dict, Optional, Type

from .logging_utils import LoggingFormatter


class StageTimer:
    """Logs ``[timing] <stage>: <ms>ms`` on exit and keeps the elapsed time on ``elapsed_ms``."""

    def __init__(self, stage: str, logger: logging.Logger, min_ms: float = 0.0, **context: Any):
        self._stage = stage
        self._logger = logger
        self._min_ms = min_ms
        self._context: Dict[str, Any] = context
        self._t0 = 0.0
        self.elapsed_ms = 0.0

    def __enter__(self) -> "StageTimer":
        self._t0 = time.perf_counter()
        return self

    def _message(self, exc_type: Optional[Type[BaseException]]) -> str:
        message = f"[timing] {self._stage}: {self.elapsed_ms:.0f}ms"
        if exc_type is not None:
            message += f" (failed: {exc_type.__name__})"
        if self._context:
            message += f" {LoggingFormatter.format(self._context)}"
        return message

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> bool:
        self.elapsed_ms = (time.perf_counter() - self._t0) * 1000
        level = logging.INFO if exc_type is not None or self.elapsed_ms >= self._min_ms else logging.DEBUG
        self._logger.log(level, self._message(exc_type))
        return False
