"""
Mask-quality metrics: region similarity J, boundary F-measure, J&F summary
statistics and cumulative IoU.

Boundaries are 4-connected and matched within a Chebyshev tolerance in
pixels; this is a simplified stand-in for contour matching with disk
structuring elements.
"""

import math
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import ValidationError


class MaskFrame(BaseModel):
    """Binary H x W segmentation mask."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    height: int = Field(gt=0)
    width: int = Field(gt=0)
    bits: np.ndarray

    @field_validator("bits", mode="before")
    @classmethod
    def _as_bool(cls, value):
        arr = np.asarray(value)
        if arr.ndim != 2:
            raise ValueError("mask bits must be a 2-D grid")
        if arr.dtype != bool and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask bits must be binary")
        return arr.astype(bool)

    @model_validator(mode="after")
    def _check_dims(self):
        if self.bits.shape != (self.height, self.width):
            raise ValueError(f"bits shape {self.bits.shape} does not match {self.height}x{self.width}")
        return self

    @classmethod
    def from_bits(cls, bits) -> "MaskFrame":
        arr = np.asarray(bits)
        if arr.ndim != 2:
            raise ValidationError("mask bits must be a 2-D grid")
        return cls(height=arr.shape[0], width=arr.shape[1], bits=arr)

    @classmethod
    def empty(cls, height: int, width: int) -> "MaskFrame":
        return cls(height=height, width=width, bits=np.zeros((height, width), dtype=bool))

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskFrame):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.height, self.width, self.bits.tobytes()))


class JFSummary(BaseModel):
    """Per-sequence J, F and J&F with benchmark recall/decay statistics."""

    j_mean: float
    f_mean: float
    jf: float
    j_recall: float
    j_decay: float
    f_recall: float
    f_decay: float
    j_per_frame: List[float]
    f_per_frame: List[float]


def _check_pair(pred: MaskFrame, gt: MaskFrame) -> None:
    if pred.bits.shape != gt.bits.shape:
        raise ValidationError(f"mask dimensions differ: {pred.bits.shape} vs {gt.bits.shape}")


def region_j(pred: MaskFrame, gt: MaskFrame) -> float:
    """Jaccard index |pred & gt| / |pred | gt|; two empty masks score 1."""
    _check_pair(pred, gt)
    union = np.logical_or(pred.bits, gt.bits).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(pred.bits, gt.bits).sum() / union)


def boundary_pixels(bits: np.ndarray) -> np.ndarray:
    """Mask pixels with a 4-neighbour outside the mask or outside the image."""
    padded = np.pad(bits, 1, mode="constant", constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return bits & ~interior


def _dilate(bits: np.ndarray, tol: int) -> np.ndarray:
    """Chebyshev dilation by ``tol`` pixels."""
    if tol == 0:
        return bits.copy()
    h, w = bits.shape
    padded = np.pad(bits, tol, mode="constant", constant_values=False)
    out = np.zeros_like(bits)
    for dy in range(2 * tol + 1):
        for dx in range(2 * tol + 1):
            out |= padded[dy:dy + h, dx:dx + w]
    return out


def boundary_f(pred: MaskFrame, gt: MaskFrame, tol: int = 1) -> float:
    """
    Boundary F-measure.

    Precision is the fraction of predicted boundary pixels within ``tol``
    (Chebyshev) of a ground-truth boundary pixel; recall is symmetric.

    Args:
        pred: Predicted mask
        gt: Ground-truth mask
        tol: Matching tolerance in pixels (>= 0)

    Returns:
        Harmonic mean of precision and recall; 1 if both boundaries are
        empty, 0 if exactly one is
    """
    _check_pair(pred, gt)
    if tol < 0:
        raise ValidationError(f"tolerance must be non-negative, got {tol}")
    pred_b = boundary_pixels(pred.bits)
    gt_b = boundary_pixels(gt.bits)
    n_pred, n_gt = int(pred_b.sum()), int(gt_b.sum())
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    precision = (pred_b & _dilate(gt_b, tol)).sum() / n_pred
    recall = (gt_b & _dilate(pred_b, tol)).sum() / n_gt
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))


def db_statistics(values: Sequence[float], threshold: float = 0.5, n_bins: int = 4) -> Dict[str, float]:
    """
    Mean, recall and decay of a per-frame measure.

    Recall is the fraction of frames above ``threshold``; decay is the mean
    over the first temporal bin minus the mean over the last one.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValidationError("statistics need at least one value")
    ids = np.round(np.linspace(1, x.size, n_bins + 1) + 1e-10).astype(int) - 1
    bins = [x[ids[i]:ids[i + 1] + 1] for i in range(n_bins)]
    return {
        "mean": float(x.mean()),
        "recall": float(np.mean(x > threshold)),
        "decay": float(bins[0].mean() - bins[-1].mean()),
    }


def _check_sequences(preds: Sequence[MaskFrame], gts: Sequence[MaskFrame]) -> None:
    if len(preds) != len(gts):
        raise ValidationError(f"sequence lengths differ: {len(preds)} vs {len(gts)}")
    if not preds:
        raise ValidationError("mask sequences are empty")


def jf_summary(preds: Sequence[MaskFrame], gts: Sequence[MaskFrame], tol: int = 1) -> JFSummary:
    """
    Average per-frame J and F over a sequence; J&F is the mean of the two.
    """
    _check_sequences(preds, gts)
    js = [region_j(p, g) for p, g in zip(preds, gts)]
    fs = [boundary_f(p, g, tol) for p, g in zip(preds, gts)]
    j_stats = db_statistics(js)
    f_stats = db_statistics(fs)
    j_mean = math.fsum(js) / len(js)
    f_mean = math.fsum(fs) / len(fs)
    return JFSummary(
        j_mean=j_mean,
        f_mean=f_mean,
        jf=(j_mean + f_mean) / 2,
        j_recall=j_stats["recall"],
        j_decay=j_stats["decay"],
        f_recall=f_stats["recall"],
        f_decay=f_stats["decay"],
        j_per_frame=js,
        f_per_frame=fs,
    )


def ciou(preds: Sequence[MaskFrame], gts: Sequence[MaskFrame]) -> float:
    """Cumulative IoU: summed intersections over summed unions (1.0 when every union is empty)."""
    _check_sequences(preds, gts)
    inter = 0
    union = 0
    for p, g in zip(preds, gts):
        _check_pair(p, g)
        inter += int(np.logical_and(p.bits, g.bits).sum())
        union += int(np.logical_or(p.bits, g.bits).sum())
    if union == 0:
        return 1.0
    return inter / union
