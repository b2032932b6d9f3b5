"""
Synthetic scenarios: a similarity curve built from Gaussian bumps, plateaus
and clamped Gaussian noise, a moving-rectangle ground-truth mask track, and
mock-tracker parameters.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from src.errors import ValidationError, wrap_pydantic_error
from src.tools.curve import SimilarityCurve
from src.tools.metrics import MaskFrame
from src.tools.rng import RngStream
from src.tools.serialization import read_json, write_json
from src.trackers.mock_tracker import MockTracker, MockTrackerParams


class Bump(BaseModel):
    """Gaussian bump amplitude * exp(-(t - center)^2 / (2 width^2))."""

    model_config = ConfigDict(frozen=True)

    center: float
    width: float = Field(gt=0)
    amplitude: float = Field(ge=0)


class Plateau(BaseModel):
    """Constant level over an inclusive frame range."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(ge=0)
    end: int = Field(ge=0)
    amplitude: float = Field(ge=0)


class CurveModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    bumps: List[Bump] = Field(default_factory=list)
    plateaus: List[Plateau] = Field(default_factory=list)
    noise_sigma: float = Field(default=0.0, ge=0)


class RectGeometry(BaseModel):
    """Rectangle moving at constant velocity on an H x W grid."""

    model_config = ConfigDict(frozen=True)

    grid_h: int = Field(default=24, gt=0)
    grid_w: int = Field(default=32, gt=0)
    rect_h: int = Field(default=8, gt=0)
    rect_w: int = Field(default=10, gt=0)
    y0: float = 4.0
    x0: float = 2.0
    vy: float = 0.1
    vx: float = 0.25

    @model_validator(mode="after")
    def _check_fit(self):
        if self.rect_h > self.grid_h or self.rect_w > self.grid_w:
            raise ValueError(f"{self.rect_h}x{self.rect_w} rectangle does not fit a {self.grid_h}x{self.grid_w} grid")
        return self

    def top_left(self, frame: int) -> Tuple[int, int]:
        y = int(math.floor(self.y0 + self.vy * frame + 0.5))
        x = int(math.floor(self.x0 + self.vx * frame + 0.5))
        return (min(max(y, 0), self.grid_h - self.rect_h), min(max(x, 0), self.grid_w - self.rect_w))


class Scenario(BaseModel):
    """Ground truth and generator parameters of one synthetic video."""

    model_config = ConfigDict(frozen=True)

    name: str = "scenario"
    horizon: int = Field(gt=0)
    gt_interval: Tuple[int, int]
    curve_model: CurveModel = Field(default_factory=CurveModel)
    tracker_params: MockTrackerParams = Field(default_factory=MockTrackerParams)
    mask_geometry: RectGeometry = Field(default_factory=RectGeometry)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_interval(self):
        start, end = self.gt_interval
        if not 0 <= start <= end < self.horizon:
            raise ValueError(f"gt_interval {self.gt_interval} must satisfy 0 <= start <= end < {self.horizon}")
        for plateau in self.curve_model.plateaus:
            if not plateau.start <= plateau.end < self.horizon:
                raise ValueError(
                    f"plateau ({plateau.start}, {plateau.end}) must satisfy start <= end < {self.horizon}"
                )
        return self

    @property
    def target_frames(self) -> range:
        return range(self.gt_interval[0], self.gt_interval[1] + 1)


class GeneratedScenario(BaseModel):
    """A scenario with its materialized curve and ground-truth masks."""

    scenario: Scenario
    curve: SimilarityCurve
    gt_masks: List[MaskFrame]

    def tracker(self, **overrides: Any) -> MockTracker:
        return MockTracker(self.scenario.tracker_params, self.gt_masks, self.scenario.target_frames, **overrides)


def build_scenario(config: Union[Dict[str, Any], Scenario], seed: int) -> Scenario:
    """Validate a scenario config and attach a seed."""
    try:
        data = config.model_dump() if isinstance(config, Scenario) else dict(config)
        data["seed"] = seed
        return Scenario(**data)
    except PydanticValidationError as e:
        raise wrap_pydantic_error(e, "scenario config") from e


def materialize_curve(scenario: Scenario) -> SimilarityCurve:
    t = np.arange(scenario.horizon, dtype=np.float64)
    values = np.zeros(scenario.horizon)
    model = scenario.curve_model
    for bump in model.bumps:
        values += bump.amplitude * np.exp(-((t - bump.center) ** 2) / (2.0 * bump.width ** 2))
    for plateau in model.plateaus:
        values[plateau.start:plateau.end + 1] += plateau.amplitude
    if model.noise_sigma > 0:
        noise = RngStream(seed=scenario.seed, label="curve-noise").generator().normal(
            0.0, model.noise_sigma, scenario.horizon
        )
        values += noise
    return SimilarityCurve.from_values(np.clip(values, 0.0, 1.0))


def materialize_masks(scenario: Scenario) -> List[MaskFrame]:
    geom = scenario.mask_geometry
    masks = []
    for frame in range(scenario.horizon):
        bits = np.zeros((geom.grid_h, geom.grid_w), dtype=bool)
        if frame in scenario.target_frames:
            y, x = geom.top_left(frame)
            bits[y:y + geom.rect_h, x:x + geom.rect_w] = True
        masks.append(MaskFrame(height=geom.grid_h, width=geom.grid_w, bits=bits))
    return masks


def gen_scenario(config: Union[Dict[str, Any], Scenario], seed: int) -> GeneratedScenario:
    """
    Build a scenario and materialize its curve and masks.

    Args:
        config: Scenario fields (the seed field is replaced)
        seed: Seed of the curve-noise stream

    Returns:
        GeneratedScenario; identical for identical (config, seed)
    """
    scenario = build_scenario(config, seed)
    return GeneratedScenario(scenario=scenario, curve=materialize_curve(scenario), gt_masks=materialize_masks(scenario))


def late_target_config(name: str = "late-target") -> Dict[str, Any]:
    """A short target in the last third of the video with a drifting tracker."""
    return {
        "name": name,
        "horizon": 90,
        "gt_interval": (62, 77),
        "curve_model": {"bumps": [{"center": 70.0, "width": 4.0, "amplitude": 0.9}], "noise_sigma": 0.05},
        "tracker_params": {"base_track_score": 0.98, "track_decay": 0.02, "quality_decay": 0.03,
                           "p_in": 0.95, "p_out": 0.1},
    }


def perfect_tracker_config(name: str = "perfect") -> Dict[str, Any]:
    """Same layout as the late-target preset with a drift-free tracker."""
    config = late_target_config(name)
    config["tracker_params"] = MockTrackerParams.perfect().model_dump()
    return config


PRESETS = {"late-target": late_target_config, "perfect": perfect_tracker_config}


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    return write_json(scenario.model_dump(mode="json"), path)


def load_scenario(path: Union[str, Path]) -> GeneratedScenario:
    data = read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path} does not contain a scenario object")
    return gen_scenario(data, int(data.get("seed", 0)))


def load_corpus(directory: Union[str, Path]) -> List[GeneratedScenario]:
    """Load every ``*.json`` scenario in a directory, in filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"corpus directory not found: {directory}")
    corpus = [load_scenario(path) for path in sorted(directory.glob("*.json"))]
    if not corpus:
        raise ValidationError(f"no scenario files in {directory}")
    return corpus
