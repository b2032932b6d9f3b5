"""
Temporal sentence grounding: moment-center detection, threshold segment
extraction, interval IoU and TSG recall metrics.

Frame intervals are inclusive ``(start, end)`` pairs. For IoU they are
measured as half-open real intervals ``[start, end + 1)`` so a single frame
has length 1.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import ValidationError
from src.tools.curve import SimilarityCurve

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


class MomentResult(BaseModel):
    """Best fixed-width window by cumulative similarity."""

    model_config = ConfigDict(frozen=True)

    window_start: int = Field(ge=0)
    center: int = Field(ge=0)
    window: int = Field(gt=0)
    window_sum: float = 0.0

    @model_validator(mode="after")
    def _check_center(self):
        if self.center != self.window_start + self.window // 2:
            raise ValueError("center must equal window_start + window // 2")
        return self

    @property
    def interval(self) -> Interval:
        return (self.window_start, self.window_start + self.window - 1)


class Segment(BaseModel):
    """Maximal run of frames whose score passes the threshold."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(ge=0)
    end: int = Field(ge=0)
    score: float

    @model_validator(mode="after")
    def _check_order(self):
        if self.start > self.end:
            raise ValueError("segment start must not exceed end")
        return self

    @property
    def interval(self) -> Interval:
        return (self.start, self.end)

    @property
    def length(self) -> int:
        return self.end - self.start + 1


class TsgReport(BaseModel):
    """Recall at IoU thresholds and mean IoU over a set of queries."""

    recalls: Dict[float, float]
    mean_iou: float = Field(ge=0.0, le=1.0)
    count: int = Field(gt=0)

    def as_row(self) -> Dict[str, float]:
        row = {f"R@{t:g}": r for t, r in sorted(self.recalls.items())}
        row["mIoU"] = self.mean_iou
        return row


class GroundingResult(BaseModel):
    """Everything the grounding stage reports for one query."""

    moment: MomentResult
    segments: List[Segment]
    best: Optional[Segment] = None
    interval: Interval
    used_fallback: bool


def default_window(length: int) -> int:
    """Window size ceil(T / 10) clamped to [1, T]."""
    if length < 1:
        raise ValidationError(f"curve length must be positive, got {length}")
    return max(1, min(length, math.ceil(length / 10)))


def _window_sums(values: Sequence[float], w: int) -> List[float]:
    # fsum is correctly rounded, so equal windows compare equal and ties are exact
    return [math.fsum(values[i:i + w]) for i in range(len(values) - w + 1)]


def moment_center(curve: SimilarityCurve, w: int) -> MomentResult:
    """
    Find the window of size ``w`` with maximal cumulative similarity.

    Args:
        curve: Similarity curve of length T
        w: Window size, 1 <= w <= T

    Returns:
        MomentResult with the earliest maximizing window and its center
    """
    if w < 1 or w > curve.length:
        raise ValidationError(f"window must satisfy 1 <= w <= {curve.length}, got {w}")
    sums = _window_sums(curve.values, w)
    best_start = 0
    best_sum = sums[0]
    for i, s in enumerate(sums):
        if s > best_sum:
            best_start, best_sum = i, s
    result = MomentResult(window_start=best_start, center=best_start + w // 2, window=w, window_sum=best_sum)
    logger.debug("moment window [%d, %d], center %d", best_start, best_start + w - 1, result.center)
    return result


def extract_segments(curve: SimilarityCurve, theta: float) -> List[Segment]:
    """
    Maximal runs of consecutive frames with score >= theta.

    Args:
        curve: Similarity curve
        theta: Post-processing threshold in (0, 1)

    Returns:
        Sorted, disjoint segments with their mean score
    """
    if not 0.0 < theta < 1.0:
        raise ValidationError(f"theta must lie in (0, 1), got {theta}")
    segments: List[Segment] = []
    values = curve.values
    start: Optional[int] = None
    for i, v in enumerate(values):
        if v >= theta:
            if start is None:
                start = i
        elif start is not None:
            segments.append(_make_segment(values, start, i - 1))
            start = None
    if start is not None:
        segments.append(_make_segment(values, start, len(values) - 1))
    return segments


def _make_segment(values: Sequence[float], start: int, end: int) -> Segment:
    run = values[start:end + 1]
    return Segment(start=start, end=end, score=math.fsum(run) / len(run))


def best_segment(segments: Sequence[Segment], curve: SimilarityCurve) -> Optional[Segment]:
    """Segment with the largest summed score; earliest start wins ties."""
    best: Optional[Segment] = None
    best_mass = -math.inf
    for seg in sorted(segments, key=lambda s: s.start):
        if seg.end >= curve.length:
            raise ValidationError(f"segment {seg.interval} exceeds curve length {curve.length}")
        mass = math.fsum(curve.values[seg.start:seg.end + 1])
        if mass > best_mass:
            best, best_mass = seg, mass
    return best


def ground(curve: SimilarityCurve, theta: float, window: Optional[int] = None) -> GroundingResult:
    """
    Run moment detection and threshold post-processing for one query.

    The reported interval is the best threshold segment, or the moment
    window when no frame passes the threshold.
    """
    w = window if window is not None else default_window(curve.length)
    moment = moment_center(curve, w)
    segments = extract_segments(curve, theta)
    best = best_segment(segments, curve)
    interval = best.interval if best is not None else moment.interval
    logger.debug("%d segments above theta=%.2f, reported interval %s", len(segments), theta, interval)
    return GroundingResult(
        moment=moment,
        segments=segments,
        best=best,
        interval=interval,
        used_fallback=best is None,
    )


def interval_iou(a: Interval, b: Interval) -> float:
    """
    IoU of two inclusive frame intervals measured as [start, end + 1).

    Returns:
        Value in [0, 1]; 0 for disjoint intervals
    """
    a_start, a_end = a
    b_start, b_end = b
    if a_start > a_end or b_start > b_end:
        raise ValidationError(f"malformed interval in {a} / {b}")
    inter = min(a_end + 1, b_end + 1) - max(a_start, b_start)
    if inter <= 0:
        return 0.0
    union = max(a_end + 1, b_end + 1) - min(a_start, b_start)
    return inter / union


def tsg_metrics(
    pairs: Sequence[Tuple[Optional[Interval], Interval]],
    thresholds: Iterable[float] = (0.3, 0.5, 0.7),
) -> TsgReport:
    """
    Recall@IoU and mean IoU.

    Args:
        pairs: (predicted interval or None, ground-truth interval)
        thresholds: IoU thresholds in (0, 1]

    Returns:
        TsgReport; a missing prediction scores IoU 0
    """
    if not pairs:
        raise ValidationError("tsg_metrics needs at least one pair")
    thresholds = sorted(set(float(t) for t in thresholds))
    if not thresholds or any(not 0.0 < t <= 1.0 for t in thresholds):
        raise ValidationError("IoU thresholds must lie in (0, 1]")
    ious = [0.0 if pred is None else interval_iou(pred, gt) for pred, gt in pairs]
    n = len(ious)
    recalls = {t: sum(1 for iou in ious if iou >= t) / n for t in thresholds}
    return TsgReport(recalls=recalls, mean_iou=math.fsum(ious) / n, count=n)


def theta_sweep(
    queries: Sequence[Tuple[SimilarityCurve, Interval]],
    thetas: Sequence[float] = (0.2, 0.3, 0.4, 0.5, 0.6),
    thresholds: Iterable[float] = (0.3, 0.5, 0.7),
    window: Optional[int] = None,
) -> pd.DataFrame:
    """
    Evaluate TSG metrics for several post-processing thresholds.

    Returns:
        DataFrame with one row per theta: theta, R@t..., mIoU
    """
    if not queries:
        raise ValidationError("theta sweep needs at least one query")
    thresholds = list(thresholds)
    rows = []
    for theta in thetas:
        pairs = [(ground(curve, theta, window).interval, gt) for curve, gt in queries]
        report = tsg_metrics(pairs, thresholds)
        rows.append({"theta": float(theta), **report.as_row()})
    return pd.DataFrame(rows)
