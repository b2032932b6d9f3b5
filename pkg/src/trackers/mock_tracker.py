"""
Deterministic stand-in tracker driven by a synthetic scenario.

Quality decays linearly with the distance from the last initialization:
tracking score clamp(q0 - eta * d) and mask quality clamp(1 - delta * d).
"""

from typing import Iterable, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import TrackerFailure, ValidationError
from src.tools.metrics import MaskFrame
from src.trackers.base_tracker import Prediction, TrackerPort, TrackerState


class MockTrackerParams(BaseModel):
    """Drift and confidence parameters of the mock tracker."""

    model_config = ConfigDict(frozen=True)

    base_track_score: float = Field(default=0.98, gt=0.0, le=1.0)
    track_decay: float = Field(default=0.02, ge=0.0)
    quality_decay: float = Field(default=0.03, ge=0.0)
    p_in: float = Field(default=0.95, ge=0.0, le=1.0)
    p_out: float = Field(default=0.1, ge=0.0, le=1.0)

    @classmethod
    def perfect(cls) -> "MockTrackerParams":
        return cls(base_track_score=1.0, track_decay=0.0, quality_decay=0.0)

    def track_score(self, distance: int) -> float:
        return min(max(self.base_track_score - self.track_decay * distance, 0.0), 1.0)

    def quality(self, distance: int) -> float:
        return min(max(1.0 - self.quality_decay * distance, 0.0), 1.0)


def degrade_mask(gt: MaskFrame, quality: float) -> MaskFrame:
    """
    Shrink a ground-truth mask to roughly ``quality`` of its area.

    Keeps the leftmost round(quality * width) columns of the mask's bounding
    box, so J falls with quality and the right boundary drifts away.
    """
    if quality >= 1.0 or gt.area == 0:
        return gt
    cols = np.flatnonzero(gt.bits.any(axis=0))
    left, right = int(cols[0]), int(cols[-1])
    keep = int(round(quality * (right - left + 1)))
    bits = gt.bits.copy()
    bits[:, left + keep:] = False
    return MaskFrame(height=gt.height, width=gt.width, bits=bits)


class MockTracker(TrackerPort):
    """
    Tracker whose output depends only on the distance from its last initialization.

    Example:
        >>> tracker = MockTracker(MockTrackerParams(), gt_masks, target_frames={5, 6, 7})
        >>> pred = tracker.predict(6)
        >>> state = tracker.init(6, pred.mask)
        >>> step = tracker.step(state, 7)
    """

    def __init__(
        self,
        params: MockTrackerParams,
        gt_masks: Sequence[MaskFrame],
        target_frames: Iterable[int],
        fail_frames: Optional[Iterable[int]] = None,
    ):
        if not gt_masks:
            raise ValidationError("mock tracker needs ground-truth masks")
        super().__init__(horizon=len(gt_masks), mask_shape=gt_masks[0].bits.shape)
        self.params = params
        self.gt_masks = list(gt_masks)
        self.target_frames: Set[int] = set(target_frames)
        self.fail_frames: Set[int] = set(fail_frames or ())

    def _step_mask(self, state: TrackerState, frame: int) -> Tuple[MaskFrame, float]:
        if frame in self.fail_frames:
            raise TrackerFailure(frame)
        d = state.distance
        return degrade_mask(self.gt_masks[frame], self.params.quality(d)), self.params.track_score(d)

    def predict(self, frame: int) -> Prediction:
        self._check_frame(frame)
        if frame in self.target_frames:
            return Prediction(mask=self.gt_masks[frame], score=self.params.p_in)
        return Prediction(mask=self.empty_mask(), score=self.params.p_out)
