from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np


class ILoggingFormatter(ABC):
    """Interface for logging formatters"""

    @abstractmethod
    def format(self, data: Any) -> Any:
        """Format data for logging"""
        pass


class ArraySummaryStrategy:
    """Replaces array-like values with a short description

    Profiles and series can hold thousands of samples; logs only need the
    shape and range.
    """

    MAX_LIST_ITEMS: int = 8
    FLOAT_DIGITS: int = 6

    @classmethod
    def summarize_array(cls, value: np.ndarray) -> str:
        if value.size == 0:
            return "<array shape=(0,)>"
        if not np.issubdtype(value.dtype, np.number):
            return f"<array shape={value.shape}>"
        return (
            f"<array shape={value.shape} min={cls.round(float(np.nanmin(value)))} "
            f"max={cls.round(float(np.nanmax(value)))}>"
        )

    @classmethod
    def round(cls, value: float) -> float:
        if not np.isfinite(value) or value == 0.0:
            return value
        return float(f"{value:.{cls.FLOAT_DIGITS}g}")


class LoggingDictFormatter(ILoggingFormatter):
    """Formats nested configuration and summary dicts for log lines"""

    def __init__(self, strategy: ArraySummaryStrategy = ArraySummaryStrategy()):
        self._strategy = strategy

    def format(self, data: Any) -> Any:
        if isinstance(data, dict):
            return {str(k): self.format(v) for k, v in data.items()}
        if isinstance(data, np.ndarray):
            return self._strategy.summarize_array(data)
        if isinstance(data, (list, tuple)):
            if len(data) > self._strategy.MAX_LIST_ITEMS:
                return f"<{type(data).__name__} len={len(data)}>"
            return [self.format(x) for x in data]
        if isinstance(data, (float, np.floating)):
            return self._strategy.round(float(data))
        if isinstance(data, np.integer):
            return int(data)
        return data


class LoggingFormatter:
    """Singleton entry point used by services to format log payloads"""

    _instance: "LoggingFormatter | None" = None
    _formatter: ILoggingFormatter

    def __new__(cls) -> "LoggingFormatter":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._formatter = LoggingDictFormatter()
        return cls._instance

    @classmethod
    def format(cls, data: Dict[str, Any]) -> Any:
        return cls()._formatter.format(data)
