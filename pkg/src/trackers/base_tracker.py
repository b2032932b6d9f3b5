"""
Abstract tracker interface for mask propagation.

A tracker is initialized at a frame with a seed mask, then stepped one frame
at a time in either temporal direction. It can also produce a fresh
per-frame prediction, which propagation uses to refresh its memory.
"""

from abc import ABC, abstractmethod
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

from src.errors import ValidationError
from src.tools.metrics import MaskFrame


class TrackerState(BaseModel):
    """Position of a tracker: the frame it was last initialized at and the frame it is on."""

    model_config = ConfigDict(frozen=True)

    init_frame: int = Field(ge=0)
    position: int = Field(ge=0)

    @property
    def distance(self) -> int:
        """Frames travelled since the last initialization."""
        return abs(self.position - self.init_frame)

    def advanced_to(self, frame: int) -> "TrackerState":
        return self.model_copy(update={"position": frame})


class TrackStep(BaseModel):
    """Result of advancing a tracker by one frame."""

    model_config = ConfigDict(frozen=True)

    mask: MaskFrame
    score: float = Field(ge=0.0, le=1.0)
    state: TrackerState


class Prediction(BaseModel):
    """Fresh per-frame mask with its prediction confidence."""

    model_config = ConfigDict(frozen=True)

    mask: MaskFrame
    score: float = Field(ge=0.0, le=1.0)


class TrackerPort(ABC):
    """
    Interface every tracker implements.

    Subclasses implement ``_step_mask`` and ``predict``; ``step`` enforces
    that the tracker advances exactly one frame per call.
    """

    def __init__(self, horizon: int, mask_shape: Tuple[int, int]):
        if horizon < 1:
            raise ValidationError(f"horizon must be positive, got {horizon}")
        self.horizon = horizon
        self.mask_shape = mask_shape

    def empty_mask(self) -> MaskFrame:
        return MaskFrame.empty(*self.mask_shape)

    def _check_frame(self, frame: int) -> None:
        if not 0 <= frame < self.horizon:
            raise ValidationError(f"frame {frame} outside [0, {self.horizon})")

    def init(self, frame: int, seed_mask: MaskFrame) -> TrackerState:
        """
        Start (or restart) tracking at ``frame`` from ``seed_mask``.

        Args:
            frame: Frame index of the seed
            seed_mask: Mask the memory is initialized with

        Returns:
            Fresh tracker state positioned at ``frame``
        """
        self._check_frame(frame)
        if seed_mask.bits.shape != self.mask_shape:
            raise ValidationError(f"seed mask shape {seed_mask.bits.shape} != {self.mask_shape}")
        return TrackerState(init_frame=frame, position=frame)

    def step(self, state: TrackerState, frame: int) -> TrackStep:
        """
        Advance to an adjacent frame.

        Raises:
            ValidationError: ``frame`` is not adjacent to the current position
            TrackerFailure: the tracker cannot produce a mask for ``frame``
        """
        self._check_frame(frame)
        if abs(frame - state.position) != 1:
            raise ValidationError(f"step must move one frame, got {state.position} -> {frame}")
        new_state = state.advanced_to(frame)
        mask, score = self._step_mask(new_state, frame)
        return TrackStep(mask=mask, score=score, state=new_state)

    @abstractmethod
    def _step_mask(self, state: TrackerState, frame: int) -> Tuple[MaskFrame, float]:
        """Mask and tracking score for ``frame`` given the advanced state."""

    @abstractmethod
    def predict(self, frame: int) -> Prediction:
        """Fresh mask and prediction score for ``frame``, independent of memory."""
