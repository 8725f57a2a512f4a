from enum import Enum

import pytest

from src.utils.extended_enum import ExtendedEnumMixin


class Colour(ExtendedEnumMixin, Enum):
    DARK_RED = "dark-red"
    BLUE = "blue"


def test_lookup_by_value_and_name():
    assert Colour.by_value("blue") is Colour.BLUE
    assert Colour.by_value("green") is None
    assert Colour.from_name("dark_red") is Colour.DARK_RED


def test_parse_accepts_values_and_dashed_names():
    assert Colour.parse("dark-red") is Colour.DARK_RED
    assert Colour.parse("BLUE") is Colour.BLUE
    assert Colour.get_values() == ["dark-red", "blue"]


def test_parse_lists_accepted_values():
    with pytest.raises(ValueError, match="dark-red, blue"):
        Colour.parse("green")
