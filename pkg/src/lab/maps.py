from __future__ import annotations
from typing import Any, Dict

from .enums import ExitCode, InitialFamily, HistoryFamily
from .exceptions import (
    LabException, InvalidParameterError, ConfigValidationError, GridMismatchError,
    NumericError, HistoryGapError, SolverError, ConstructionError,
    DecouplingWindowError
)


class StandardMap:
    _content: Dict[Any, Any] = {}
    _default: Any

    @classmethod
    def get(cls, key: Any) -> Any:
        return cls._content.get(key, cls._default)


class ExitCodeMap(StandardMap):
    _content: Dict[type, ExitCode] = {
        InvalidParameterError: ExitCode.VALIDATION,
        ConfigValidationError: ExitCode.VALIDATION,
        GridMismatchError: ExitCode.VALIDATION,
        DecouplingWindowError: ExitCode.VALIDATION,
        NumericError: ExitCode.NUMERIC,
        HistoryGapError: ExitCode.NUMERIC,
        SolverError: ExitCode.NUMERIC,
        ConstructionError: ExitCode.NUMERIC,
    }
    _default: ExitCode = ExitCode.NUMERIC

    @classmethod
    def for_exception(cls, exc: LabException) -> ExitCode:
        """Resolve the exit code of the closest mapped ancestor class"""
        for klass in type(exc).__mro__:
            if klass in cls._content:
                return cls._content[klass]
        return cls._default


class InitialFamilyKeysMap(StandardMap):
    """Config keys each initial-condition family requires"""
    _content: Dict[InitialFamily, tuple] = {
        InitialFamily.GAUSSIAN: ("mean", "sd"),
        InitialFamily.STEADY_STATE: ("b1",),
        InitialFamily.TABLE: ("path",),
    }
    _default: tuple = ()


class HistoryFamilyKeysMap(StandardMap):
    _content: Dict[HistoryFamily, tuple] = {
        HistoryFamily.CONSTANT: (),
        HistoryFamily.TABLE: ("path",),
    }
    _default: tuple = ()
