import pytest

from src.lab.config import LabSettings, get_lab_settings, reset_lab_settings
from src.lab.exceptions import ConfigValidationError


def test_defaults(monkeypatch):
    for name in ("NNLIF_THREADS", "NNLIF_MEMORY_BUDGET_MB", "NNLIF_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    settings = LabSettings()
    assert settings.threads == 1
    assert settings.memory_budget_bytes == 512 * 1024 * 1024
    assert settings.log_level == "INFO"


def test_environment_values(monkeypatch):
    monkeypatch.setenv("NNLIF_THREADS", "4")
    monkeypatch.setenv("NNLIF_LOG_LEVEL", "debug")
    settings = LabSettings()
    assert settings.threads == 4
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize("name, raw", [
    ("NNLIF_THREADS", "0"), ("NNLIF_THREADS", "two"), ("NNLIF_LOG_LEVEL", "chatty"),
])
def test_invalid_values(monkeypatch, name, raw):
    monkeypatch.setenv(name, raw)
    with pytest.raises(ConfigValidationError):
        LabSettings()


def test_singleton_is_reset(monkeypatch):
    first = get_lab_settings()
    assert get_lab_settings() is first
    reset_lab_settings()
    assert get_lab_settings() is not first
