"""
Bidirectional Anchor-updated Propagation (BAP).

Propagation starts at the moment center, runs forward to the last frame and
then backward to the first, each pass from a fresh initialization. At every
sampled anchor the tracker's memory is cleared and re-seeded with a fresh
prediction when the cumulative tracking confidence since the last clear falls
below ``lambda * S^p``.
"""

import logging
from typing import Iterable, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import TrackerFailure, ValidationError
from src.tools.metrics import MaskFrame
from src.trackers.base_tracker import TrackerPort

logger = logging.getLogger(__name__)

# keeps the running product strictly positive after a zero tracking score
MIN_CUM_TRACK = 1e-300


class PropagationPlan(BaseModel):
    """Visit order and anchor checkpoints of one propagation run."""

    model_config = ConfigDict(frozen=True)

    horizon: int = Field(gt=0)
    anchor: int = Field(ge=0)
    forward_order: Tuple[int, ...]
    backward_order: Tuple[int, ...]
    anchor_set: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_cover(self):
        visited = sorted((*self.forward_order, *self.backward_order, self.anchor))
        if visited != list(range(self.horizon)):
            raise ValueError("plan must visit every frame exactly once")
        if self.anchor not in self.anchor_set:
            raise ValueError("the start frame must be one of the anchors")
        return self


class UpdateRule:
    """
    Running product of tracking scores and the memory-clearing test.

    The product restarts at 1 after every clear.
    """

    def __init__(self, update_lambda: float):
        if not 0.0 < update_lambda <= 1.0:
            raise ValidationError(f"lambda must lie in (0, 1], got {update_lambda}")
        self.update_lambda = update_lambda
        self.cum_track = 1.0

    def observe(self, track_score: float) -> None:
        self.cum_track = max(self.cum_track * track_score, MIN_CUM_TRACK)

    def should_clear(self, prediction_score: float) -> bool:
        return memory_update_decision(self.cum_track, prediction_score, self.update_lambda)

    def reset(self) -> None:
        self.cum_track = 1.0


class UpdateEvent(BaseModel):
    """Memory-update decision taken at one anchor."""

    model_config = ConfigDict(frozen=True)

    frame: int
    direction: Literal["forward", "backward"]
    cum_track: float
    prediction_score: float
    threshold: float
    cleared: bool


class UpdateLog(BaseModel):
    """Every anchor decision of a run, in visit order."""

    events: List[UpdateEvent] = Field(default_factory=list)

    @property
    def n_updates(self) -> int:
        return sum(1 for e in self.events if e.cleared)

    @property
    def cleared_frames(self) -> List[int]:
        return [e.frame for e in self.events if e.cleared]


class PropagationResult(BaseModel):
    """One output mask per frame plus the update log."""

    masks: List[MaskFrame]
    track_scores: List[float]
    log: UpdateLog


class PropagationConfig(BaseModel):
    """
    Switches for the propagation ablation.

    All three off is plain forward propagation from frame 0; enabling them in
    order adds anchor updates (clear at every anchor), score-based adaptive
    clearing, and bidirectional propagation from the moment center.
    """

    model_config = ConfigDict(frozen=True)

    bidirectional: bool = True
    anchor_updates: bool = True
    adaptive_clearing: bool = True
    update_lambda: float = Field(default=0.9, gt=0.0, le=1.0)


ABLATION_STEPS = {
    "forward_baseline": PropagationConfig(bidirectional=False, anchor_updates=False, adaptive_clearing=False),
    "anchor_updating": PropagationConfig(bidirectional=False, anchor_updates=True, adaptive_clearing=False),
    "adaptive_clearing": PropagationConfig(bidirectional=False, anchor_updates=True, adaptive_clearing=True),
    "bidirectional": PropagationConfig(bidirectional=True, anchor_updates=True, adaptive_clearing=True),
}


def memory_update_decision(cum_track: float, prediction_score: float, update_lambda: float) -> bool:
    """True (clear memory) iff cum_track < lambda * S^p."""
    return cum_track < update_lambda * prediction_score


def plan_bap(horizon: int, center: int, anchors: Iterable[int]) -> PropagationPlan:
    """
    Plan a forward pass center+1..T-1 followed by a backward pass center-1..0.

    Raises:
        ValidationError: ``center`` is not an anchor or an index is out of range
    """
    anchor_set = tuple(sorted(set(anchors)))
    if center not in anchor_set:
        raise ValidationError(f"start frame {center} is not among the anchors")
    if not 0 <= center < horizon or any(not 0 <= a < horizon for a in anchor_set):
        raise ValidationError(f"anchors must lie in [0, {horizon})")
    return PropagationPlan(
        horizon=horizon,
        anchor=center,
        forward_order=tuple(range(center + 1, horizon)),
        backward_order=tuple(range(center - 1, -1, -1)),
        anchor_set=anchor_set,
    )


def run_bap(
    plan: PropagationPlan,
    tracker: TrackerPort,
    update_lambda: float = 0.9,
    adaptive_clearing: bool = True,
) -> PropagationResult:
    """
    Execute a propagation plan against a tracker.

    Args:
        plan: Visit order and anchors
        tracker: Tracker to drive
        update_lambda: Sensitivity of the clearing test
        adaptive_clearing: When False every anchor clears memory unconditionally

    Returns:
        PropagationResult with exactly one mask per frame
    """
    if tracker.horizon != plan.horizon:
        raise ValidationError(f"tracker covers {tracker.horizon} frames, plan {plan.horizon}")
    masks: List[Optional[MaskFrame]] = [None] * plan.horizon
    scores: List[float] = [1.0] * plan.horizon
    anchors = set(plan.anchor_set)
    rule = UpdateRule(update_lambda)
    log = UpdateLog()

    seed = tracker.predict(plan.anchor)
    masks[plan.anchor] = seed.mask

    passes = (("forward", plan.forward_order), ("backward", plan.backward_order))
    for direction, order in passes:
        state = tracker.init(plan.anchor, seed.mask)
        rule.reset()
        for frame in order:
            try:
                step = tracker.step(state, frame)
                mask, track_score, state = step.mask, step.score, step.state
            except TrackerFailure as e:
                logger.debug("%s; emitting an empty mask", e)
                mask, track_score, state = tracker.empty_mask(), 0.0, state.advanced_to(frame)

            if frame in anchors:
                pred = tracker.predict(frame)
                threshold = update_lambda * pred.score
                clear = rule.should_clear(pred.score) if adaptive_clearing else True
                log.events.append(UpdateEvent(
                    frame=frame,
                    direction=direction,
                    cum_track=rule.cum_track,
                    prediction_score=pred.score,
                    threshold=threshold,
                    cleared=clear,
                ))
                if clear:
                    logger.debug("memory cleared at frame %d (%s)", frame, direction)
                    state = tracker.init(frame, pred.mask)
                    rule.reset()
                    mask = pred.mask
                else:
                    rule.observe(track_score)
            else:
                rule.observe(track_score)

            masks[frame] = mask
            scores[frame] = track_score

    return PropagationResult(masks=masks, track_scores=scores, log=log)


def run_forward_baseline(horizon: int, tracker: TrackerPort) -> PropagationResult:
    """Initialize at frame 0 and step to the end without any updates."""
    return run_bap(plan_bap(horizon, 0, [0]), tracker)


def run_propagation(
    horizon: int,
    center: int,
    anchors: Iterable[int],
    tracker: TrackerPort,
    config: PropagationConfig = PropagationConfig(),
) -> PropagationResult:
    """
    Run propagation under an ablation configuration.

    Non-bidirectional configurations start at frame 0 and only go forward.
    """
    start = center if config.bidirectional else 0
    if not config.anchor_updates:
        return run_bap(plan_bap(horizon, start, [start]), tracker, config.update_lambda)
    plan = plan_bap(horizon, start, set(anchors) | {start})
    return run_bap(plan, tracker, config.update_lambda, adaptive_clearing=config.adaptive_clearing)
