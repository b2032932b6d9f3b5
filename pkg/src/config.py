"""
Runtime settings. Defaults can be overridden through ``MOMENTSEG_<FIELD>``
environment variables or a ``.env`` file.
"""

import os
from functools import lru_cache
from typing import Any, Dict, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError, field_validator

from src.errors import ConfigurationError

ENV_PREFIX = "MOMENTSEG_"


class Settings(BaseModel):
    """Default hyperparameters and runtime options."""

    # [FIND] matching
    temperature: float = Field(default=0.07, gt=0)
    positive_weight: float = Field(default=2.0, ge=0)

    # curve conditioning
    smooth_sigma: float = Field(default=1.0, gt=0)
    smooth_radius: int = Field(default=3, ge=1)

    # grounding / sampling / propagation
    theta: float = Field(default=0.4, gt=0, lt=1)
    update_lambda: float = Field(default=0.9, gt=0, le=1)
    num_samples: int = Field(default=8, ge=1)
    iou_thresholds: Tuple[float, ...] = (0.3, 0.5, 0.7)

    # metrics
    boundary_tol: int = Field(default=1, ge=0)

    # runtime
    max_workers: int = Field(default=4, ge=1)
    output_dir: str = "outputs"
    log_level: str = "INFO"

    @field_validator("iou_thresholds", mode="before")
    @classmethod
    def _parse_thresholds(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(float(part) for part in value.split(",") if part.strip())
        return value

    @field_validator("iou_thresholds")
    @classmethod
    def _check_thresholds(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value or any(not 0 < t <= 1 for t in value):
            raise ValueError("IoU thresholds must lie in (0, 1]")
        return tuple(sorted(value))


def _env_overrides() -> Dict[str, str]:
    overrides = {}
    for name in Settings.model_fields:
        raw = os.getenv(ENV_PREFIX + name.upper())
        if raw is not None:
            overrides[name] = raw
    return overrides


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Load settings once per process.

    Returns:
        Settings with environment overrides applied

    Raises:
        ConfigurationError: an override does not validate
    """
    load_dotenv()
    try:
        return Settings(**_env_overrides())
    except PydanticValidationError as e:
        raise ConfigurationError(f"Invalid MOMENTSEG_* setting: {e}") from e
