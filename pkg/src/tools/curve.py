"""
Similarity curves: activation, Gaussian smoothing, linear resampling and
weight normalization.

Conditioning order used throughout the toolkit is
resample (L_t -> T) -> sigmoid -> smooth.
"""

import math
from typing import Optional, Sequence, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from src.errors import DegenerateWeights, ValidationError, wrap_pydantic_error


class RawScoreCurve(BaseModel):
    """Pre-activation per-frame logits (unbounded, finite)."""

    model_config = ConfigDict(frozen=True)

    length: int = Field(gt=0)
    values: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_values(self):
        if len(self.values) != self.length:
            raise ValueError(f"expected {self.length} values, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("curve values must be finite")
        return self

    @classmethod
    def from_values(cls, values: Union[Sequence[float], np.ndarray]):
        """Build a curve from a sequence, raising the toolkit ValidationError on bad input."""
        vals = tuple(float(v) for v in values)
        try:
            return cls(length=len(vals), values=vals)
        except PydanticValidationError as e:
            raise wrap_pydantic_error(e, cls.__name__) from e

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


class SimilarityCurve(RawScoreCurve):
    """Per-frame relevance scores in [0, 1]."""

    @model_validator(mode="after")
    def _check_range(self):
        if any(v < 0.0 or v > 1.0 for v in self.values):
            raise ValueError("similarity values must lie in [0, 1]")
        return self


CurveT = TypeVar("CurveT", bound=RawScoreCurve)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activate(raw: RawScoreCurve) -> SimilarityCurve:
    """
    Map raw logits to similarity scores with the sigmoid.

    Args:
        raw: Raw per-frame logits

    Returns:
        SimilarityCurve of the same length
    """
    values = raw.as_array()
    if not np.all(np.isfinite(values)):
        raise ValidationError("cannot activate a non-finite curve")
    return SimilarityCurve.from_values(sigmoid(values))


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """Normalized discrete Gaussian of half-width ``radius``."""
    if sigma <= 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if radius < 1:
        raise ValidationError(f"radius must be a positive integer, got {radius}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def gaussian_smooth(curve: SimilarityCurve, sigma: float, radius: int) -> SimilarityCurve:
    """
    Smooth a similarity curve with a reflect-padded Gaussian kernel.

    Args:
        curve: Curve to smooth
        sigma: Kernel standard deviation in frames
        radius: Kernel half-width; must be smaller than the curve length

    Returns:
        Smoothed curve, bounded by the input min/max
    """
    if radius >= curve.length:
        raise ValidationError(f"radius {radius} must be smaller than curve length {curve.length}")
    kernel = gaussian_kernel(sigma, radius)
    values = curve.as_array()
    padded = np.pad(values, radius, mode="reflect")
    smoothed = np.convolve(padded, kernel, mode="valid")
    # rounding can leave the convex hull by an ulp
    smoothed = np.clip(smoothed, values.min(), values.max())
    return SimilarityCurve.from_values(smoothed)


def resample_linear(curve: CurveT, target_len: int) -> CurveT:
    """
    Align-corners linear resampling to ``target_len`` frames.

    Args:
        curve: Raw or similarity curve
        target_len: Output length (positive)

    Returns:
        Curve of the same kind with ``target_len`` values
    """
    if target_len < 1:
        raise ValidationError(f"target_len must be positive, got {target_len}")
    kind: Type[CurveT] = type(curve)
    if target_len == curve.length:
        return curve
    values = curve.as_array()
    source_len = curve.length
    if target_len == 1:
        return kind.from_values([values[(source_len - 1) // 2]])
    if source_len == 1:
        return kind.from_values(np.full(target_len, values[0]))
    positions = np.arange(target_len, dtype=np.float64) * (source_len - 1) / (target_len - 1)
    resampled = np.interp(positions, np.arange(source_len, dtype=np.float64), values)
    return kind.from_values(resampled)


def normalize_weights(values: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """
    Normalize non-negative weights into a probability vector.

    Raises:
        DegenerateWeights: no weight is strictly positive
        ValidationError: negative or non-finite weight
    """
    weights = np.asarray(values, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0:
        raise ValidationError("weights must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValidationError("weights must be finite and non-negative")
    total = weights.sum()
    if total <= 0:
        raise DegenerateWeights("all weights are zero")
    return weights / total


def smooth_clamped(curve: SimilarityCurve, sigma: float, radius: int) -> SimilarityCurve:
    """Gaussian smoothing with the radius clamped to ``length - 1``; single-frame curves pass through."""
    radius = min(radius, curve.length - 1)
    if radius < 1:
        return curve
    return gaussian_smooth(curve, sigma, radius)


def condition_raw_curve(
    raw: RawScoreCurve,
    target_len: int,
    sigma: float,
    radius: int,
) -> SimilarityCurve:
    """
    Full conditioning chain: resample to ``target_len``, activate, smooth.

    The smoothing radius is clamped to ``target_len - 1``; a single-frame
    curve is not smoothed.
    """
    return smooth_clamped(activate(resample_linear(raw, target_len)), sigma, radius)


def as_similarity(
    curve: RawScoreCurve,
    target_len: Optional[int] = None,
    sigma: float = 1.0,
    radius: int = 3,
) -> SimilarityCurve:
    """
    Bring a loaded curve onto the frame grid as a similarity curve.

    Raw curves go through ``condition_raw_curve``; similarity curves are only
    resampled when ``target_len`` differs from their length.
    """
    target_len = target_len or curve.length
    if isinstance(curve, SimilarityCurve):
        return resample_linear(curve, target_len)
    return condition_raw_curve(curve, target_len, sigma, radius)
