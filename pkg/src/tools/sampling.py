"""
Frame-sampling strategies: FirstK, Uniform, Random, TopK, NearbyK and
Moment-Centric Sampling (MCS).

Every strategy returns a SampleSet of ``min(K, T)`` sorted, distinct frame
indices. Randomness only enters through an explicit RngStream.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import ValidationError
from src.tools.curve import SimilarityCurve, normalize_weights
from src.tools.rng import RngStream

logger = logging.getLogger(__name__)

STRATEGIES = ("firstk", "uniform", "random", "topk", "nearbyk", "mcs")


class SampleSet(BaseModel):
    """Sorted distinct frame indices chosen by a sampling strategy."""

    model_config = ConfigDict(frozen=True)

    strategy: str
    horizon: int = Field(gt=0)
    k_requested: int = Field(gt=0)
    indices: Tuple[int, ...]
    center: Optional[int] = None
    k_left: Optional[int] = None
    k_right: Optional[int] = None
    refilled: int = 0

    @model_validator(mode="after")
    def _check_indices(self):
        idx = self.indices
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if idx and (idx[0] < 0 or idx[-1] >= self.horizon):
            raise ValueError(f"indices must lie in [0, {self.horizon})")
        if len(idx) != min(self.k_requested, self.horizon):
            raise ValueError(f"expected {min(self.k_requested, self.horizon)} indices, got {len(idx)}")
        if self.center is not None and self.center not in idx:
            raise ValueError("center must be one of the sampled indices")
        return self

    @property
    def anchor(self) -> int:
        """Frame at which propagation starts: the center if present, else the first index."""
        return self.center if self.center is not None else self.indices[0]


def _check_sizes(horizon: int, k: int) -> None:
    if horizon < 1:
        raise ValidationError(f"T must be at least 1, got {horizon}")
    if k < 1:
        raise ValidationError(f"K must be at least 1, got {k}")


def _check_center(center: int, horizon: int) -> None:
    if not 0 <= center < horizon:
        raise ValidationError(f"center {center} outside [0, {horizon})")


def sample_first_k(horizon: int, k: int) -> SampleSet:
    """The first min(K, T) frames."""
    _check_sizes(horizon, k)
    return SampleSet(strategy="firstk", horizon=horizon, k_requested=k, indices=tuple(range(min(k, horizon))))


def uniform_positions(horizon: int, k: int) -> List[int]:
    """Evenly spaced indices round-half-up(i * (T-1) / (K-1)), deduplicated."""
    if k == 1:
        return [(horizon - 1) // 2]
    # integer form of floor(i * (T - 1) / (K - 1) + 0.5)
    positions = [(2 * i * (horizon - 1) + (k - 1)) // (2 * (k - 1)) for i in range(k)]
    return sorted(set(positions))


def sample_uniform(horizon: int, k: int) -> SampleSet:
    """Evenly spaced frames including the first and last frame when K >= 2."""
    _check_sizes(horizon, k)
    return SampleSet(
        strategy="uniform",
        horizon=horizon,
        k_requested=k,
        indices=tuple(uniform_positions(horizon, min(k, horizon))),
    )


def sample_random(horizon: int, k: int, rng: RngStream) -> SampleSet:
    """min(K, T) frames drawn uniformly without replacement."""
    _check_sizes(horizon, k)
    n = min(k, horizon)
    if n == horizon:
        indices = tuple(range(horizon))
    else:
        drawn = rng.generator().choice(horizon, size=n, replace=False)
        indices = tuple(sorted(int(i) for i in drawn))
    return SampleSet(strategy="random", horizon=horizon, k_requested=k, indices=indices)


def _rank_by_score(values: Sequence[float], candidates: Sequence[int]) -> List[int]:
    # highest score first, smaller index on ties
    return sorted(candidates, key=lambda i: (-values[i], i))


def sample_top_k(curve: SimilarityCurve, k: int) -> SampleSet:
    """The K highest-scoring frames (ties to the smaller index), sorted."""
    _check_sizes(curve.length, k)
    chosen = _rank_by_score(curve.values, range(curve.length))[:k]
    return SampleSet(strategy="topk", horizon=curve.length, k_requested=k, indices=tuple(sorted(chosen)))


def sample_nearby_k(curve: SimilarityCurve, k: int, center: int) -> SampleSet:
    """
    Contiguous block of min(K, T) frames around ``center``.

    With an even block the extra frame goes to the left; the block is
    shifted to stay inside the video.
    """
    horizon = curve.length
    _check_sizes(horizon, k)
    _check_center(center, horizon)
    n = min(k, horizon)
    start = min(max(center - n // 2, 0), horizon - n)
    return SampleSet(
        strategy="nearbyk",
        horizon=horizon,
        k_requested=k,
        indices=tuple(range(start, start + n)),
        center=center,
    )


def inverse_cdf_sample(
    weights: Sequence[float],
    k: int,
    rng: Optional[RngStream] = None,
    offset: int = 0,
    uniforms: Optional[Sequence[float]] = None,
) -> List[int]:
    """
    Draw ``k`` indices by inverting the CDF of the normalized weights.

    Uniforms are stratified, u_m = (m + v_m) / k with v_m ~ U(0, 1), unless
    ``uniforms`` is given explicitly. Each u maps to min{i : F(i) >= u}.

    Args:
        weights: Non-negative weights over the index range [offset, offset + len)
        k: Number of draws (may be 0)
        rng: Stream supplying the jitter; required when ``uniforms`` is None
        offset: Index of the first weight
        uniforms: Explicit values in [0, 1] to invert instead of random draws

    Returns:
        List of k indices (a multiset, in draw order)

    Raises:
        DegenerateWeights: all weights are zero
    """
    if k < 0:
        raise ValidationError(f"k must be non-negative, got {k}")
    probs = normalize_weights(weights)
    if uniforms is not None:
        u = np.asarray(uniforms, dtype=np.float64)
        if np.any((u < 0) | (u > 1)):
            raise ValidationError("uniforms must lie in [0, 1]")
    else:
        if k == 0:
            return []
        if rng is None:
            raise ValidationError("an RngStream is required for random draws")
        jitter = rng.generator().random(k)
        u = (np.arange(k, dtype=np.float64) + jitter) / k
    cdf = np.cumsum(probs)
    positive = np.flatnonzero(probs > 0)
    # u = 0 would otherwise select a leading zero-weight bin
    u = np.where(u <= 0.0, np.nextafter(0.0, 1.0), u)
    picks = np.searchsorted(cdf, u, side="left")
    # cumulative rounding can leave F(last) slightly below 1
    picks = np.minimum(picks, positive[-1])
    return [int(i) + offset for i in picks]


def mcs_allocation(curve: SimilarityCurve, k: int, center: int) -> Tuple[int, int, float, float]:
    """
    Split the K - 1 non-center samples between the two sides of ``center``.

    Returns:
        (k_left, k_right, w_left, w_right); k_left is rounded half-up
    """
    values = curve.values
    w_left = math.fsum(values[:center])
    w_right = math.fsum(values[center + 1:])
    total = w_left + w_right
    if total <= 0:
        return 0, 0, w_left, w_right
    k_left = math.floor((k - 1) * w_left / total + 0.5)
    return k_left, k - 1 - k_left, w_left, w_right


def _uniform_with_center(horizon: int, k: int, center: int) -> List[int]:
    indices = uniform_positions(horizon, min(k, horizon))
    if center not in indices:
        nearest = min(indices, key=lambda i: (abs(i - center), i))
        indices = sorted([i for i in indices if i != nearest] + [center])
    return indices


def mcs(curve: SimilarityCurve, k: int, center: int, rng: RngStream) -> SampleSet:
    """
    Moment-Centric Sampling.

    Keeps the moment center, allocates the remaining K - 1 samples to the left
    and right regions in proportion to their cumulative similarity, and draws
    each region by inverse-CDF sampling. Duplicates are removed and the
    deficit refilled with the highest-scoring unselected frames.

    Args:
        curve: Similarity curve of length T
        k: Number of frames to select
        center: Moment center c*
        rng: Stream for the inverse-CDF jitter

    Returns:
        SampleSet containing ``center`` with min(K, T) indices
    """
    horizon = curve.length
    _check_sizes(horizon, k)
    _check_center(center, horizon)
    n = min(k, horizon)

    k_left, k_right, w_left, w_right = mcs_allocation(curve, k, center)
    if k == 1:
        indices = [center]
    elif w_left + w_right <= 0:
        logger.debug("flat curve around center %d, falling back to uniform sampling", center)
        indices = _uniform_with_center(horizon, k, center)
        return SampleSet(
            strategy="mcs", horizon=horizon, k_requested=k, indices=tuple(indices),
            center=center, k_left=0, k_right=0,
        )
    else:
        values = curve.values
        left = inverse_cdf_sample(values[:center], k_left, rng.child("left")) if k_left > 0 else []
        right = (
            inverse_cdf_sample(values[center + 1:], k_right, rng.child("right"), offset=center + 1)
            if k_right > 0 else []
        )
        indices = sorted({center, *left, *right})

    refilled = n - len(indices)
    if refilled > 0:
        chosen = set(indices)
        spare = _rank_by_score(curve.values, [i for i in range(horizon) if i not in chosen])
        indices = sorted(chosen | set(spare[:refilled]))
    logger.debug("mcs center=%d k_left=%d k_right=%d refilled=%d", center, k_left, k_right, refilled)
    return SampleSet(
        strategy="mcs",
        horizon=horizon,
        k_requested=k,
        indices=tuple(indices),
        center=center,
        k_left=k_left,
        k_right=k_right,
        refilled=max(refilled, 0),
    )


def sample_frames(
    strategy: str,
    curve: SimilarityCurve,
    k: int,
    center: int,
    rng: RngStream,
) -> SampleSet:
    """
    Dispatch to a strategy by name.

    Args:
        strategy: One of ``STRATEGIES``
        curve: Similarity curve (ignored by curve-free strategies)
        k: Number of frames
        center: Moment center (used by nearbyk and mcs)
        rng: Stream for the random strategies
    """
    dispatch: Dict[str, Callable[[], SampleSet]] = {
        "firstk": lambda: sample_first_k(curve.length, k),
        "uniform": lambda: sample_uniform(curve.length, k),
        "random": lambda: sample_random(curve.length, k, rng.child("random")),
        "topk": lambda: sample_top_k(curve, k),
        "nearbyk": lambda: sample_nearby_k(curve, k, center),
        "mcs": lambda: mcs(curve, k, center, rng.child("mcs")),
    }
    if strategy not in dispatch:
        raise ValidationError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    return dispatch[strategy]()
