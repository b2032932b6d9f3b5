"""
Tests for settings loading.
"""

import pytest

from src.config import Settings, get_settings
from src.errors import ConfigurationError


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached per process; reload around every test"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


class TestSettings:
    """Tests for Settings defaults and environment overrides"""

    def test_defaults(self, monkeypatch):
        for name in Settings.model_fields:
            monkeypatch.delenv(f"MOMENTSEG_{name.upper()}", raising=False)
        settings = get_settings()
        assert settings.theta == 0.4
        assert settings.update_lambda == 0.9
        assert settings.num_samples == 8
        assert settings.iou_thresholds == (0.3, 0.5, 0.7)

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("MOMENTSEG_THETA", "0.55")
        monkeypatch.setenv("MOMENTSEG_MAX_WORKERS", "2")
        settings = get_settings()
        assert settings.theta == 0.55
        assert settings.max_workers == 2

    def test_threshold_list_is_parsed_and_sorted(self, monkeypatch):
        monkeypatch.setenv("MOMENTSEG_IOU_THRESHOLDS", "0.7,0.1")
        assert get_settings().iou_thresholds == (0.1, 0.7)

    def test_settings_are_cached(self):
        assert get_settings() is get_settings()

    @pytest.mark.parametrize("name,value", [
        ("MOMENTSEG_THETA", "1.5"),
        ("MOMENTSEG_UPDATE_LAMBDA", "0"),
        ("MOMENTSEG_IOU_THRESHOLDS", "0.5,2"),
        ("MOMENTSEG_NUM_SAMPLES", "many"),
    ])
    def test_invalid_override(self, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(ConfigurationError):
            get_settings()
