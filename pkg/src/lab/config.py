import logging
import os
from typing import Callable, Dict, Optional

from .constants import EnvSettings
from .exceptions import ConfigValidationError


class LabSettings:
    """Process-level settings read from the environment (after load_dotenv)"""

    def __init__(self):
        self._adapters: Dict[str, Callable[[str], object]] = {
            EnvSettings.THREADS_ENV: self._positive_int,
            EnvSettings.MEMORY_BUDGET_ENV: self._positive_int,
            EnvSettings.LOG_LEVEL_ENV: self._log_level,
        }
        self._threads = self._read(EnvSettings.THREADS_ENV, EnvSettings.DEFAULT_THREADS)
        self._memory_budget_mb = self._read(EnvSettings.MEMORY_BUDGET_ENV, EnvSettings.DEFAULT_MEMORY_BUDGET_MB)
        self._log_level = self._read(EnvSettings.LOG_LEVEL_ENV, EnvSettings.DEFAULT_LOG_LEVEL)

    def _read(self, env_var: str, default: object) -> object:
        raw = os.getenv(env_var)
        if raw is None or raw.strip() == "":
            return default
        try:
            return self._adapters[env_var](raw.strip())
        except ValueError as exc:
            raise ConfigValidationError(f"{env_var}={raw!r}: {exc}", "environment", env_var) from exc

    @staticmethod
    def _positive_int(raw: str) -> int:
        value = int(raw)
        if value < 1:
            raise ValueError("must be a positive integer")
        return value

    @staticmethod
    def _log_level(raw: str) -> str:
        level = raw.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError("unknown log level")
        return level

    @property
    def threads(self) -> int:
        return int(self._threads)  # type: ignore[call-overload]

    @property
    def memory_budget_bytes(self) -> int:
        return int(self._memory_budget_mb) * 1024 * 1024  # type: ignore[call-overload]

    @property
    def log_level(self) -> str:
        return str(self._log_level)


_lab_settings: Optional[LabSettings] = None


def get_lab_settings() -> LabSettings:
    """Return the module-level settings singleton"""
    global _lab_settings
    if _lab_settings is None:
        _lab_settings = LabSettings()
    return _lab_settings


def reset_lab_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment"""
    global _lab_settings
    _lab_settings = None
