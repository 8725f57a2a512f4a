from __future__ import annotations
from typing import Any, List, Optional


class ExtendedEnumMixin:
    """Lookup helpers for string-valued enums read from config files and the command line.

    Usage: class Scenario(ExtendedEnumMixin, Enum)
    """

    @classmethod
    def by_value(cls, val: Any) -> Optional[Any]:
        """Member with this value, or None"""
        for member in cls.__members__.values():  # type: ignore[attr-defined]
            if member.value == val:
                return member
        return None

    @classmethod
    def from_name(cls, val: str) -> Optional[Any]:
        """Member whose name matches case-insensitively, or None"""
        for member in cls.__members__.values():  # type: ignore[attr-defined]
            if member.name.lower() == val.lower():
                return member
        return None

    @classmethod
    def get_values(cls) -> List[Any]:
        return [member.value for member in cls.__members__.values()]  # type: ignore[attr-defined]

    @classmethod
    def parse(cls, raw: str) -> Any:
        """Member by value, falling back to name; ValueError lists the accepted values"""
        member = cls.by_value(raw)
        if member is None:
            member = cls.from_name(raw.replace("-", "_"))
        if member is None:
            raise ValueError(f"{raw!r} is not one of {', '.join(map(str, cls.get_values()))}")
        return member
