from pathlib import Path
from typing import Callable

import pytest

BASE_CONFIG = """
[model]
a = 1
b = 0
b0 = 0
D = 0
V_R = -1
V_F = 0

[grid]
n_cells = 200

[time]
dt = 1e-3
T = 0.2
snapshot_every = 0.05

[initial]
family = gaussian
mean = -1
sd = 0.4
"""


@pytest.fixture
def write_config(tmp_path) -> Callable[..., Path]:
    """Writes BASE_CONFIG plus extra INI text and returns its path"""
    def write(extra: str = "", base: str = BASE_CONFIG, name: str = "experiment.ini") -> Path:
        path = tmp_path / name
        path.write_text(base + "\n" + extra, encoding="utf-8")
        return path
    return write
