"""
[FIND]-token matching kernel: frame-token pooling, cosine similarity matrix,
the weighted sigmoid matching loss and its analytic gradient.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import ValidationError
from src.tools.curve import RawScoreCurve, sigmoid

LOG_FLOOR = 1e-12


class TokenMatrix(BaseModel):
    """
    Frame tokens, [FIND] tokens, match labels and the valid-pair mask.

    ``valid_pairs`` of None means every (find, frame) pair is valid.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frame_tokens: np.ndarray
    find_tokens: np.ndarray
    labels: np.ndarray
    valid_pairs: Optional[Tuple[Tuple[int, int], ...]] = None
    temperature: float = Field(default=0.07, gt=0)
    positive_weight: float = Field(default=2.0, ge=0)

    @field_validator("frame_tokens", "find_tokens", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("token matrices must be non-empty 2-D arrays")
        if not np.all(np.isfinite(arr)):
            raise ValueError("token values must be finite")
        if np.any(np.linalg.norm(arr, axis=1) == 0):
            raise ValueError("token rows must have non-zero norm")
        return arr

    @field_validator("labels", mode="before")
    @classmethod
    def _as_labels(cls, value):
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim != 2 or not np.all((arr == 0) | (arr == 1)):
            raise ValueError("labels must be a 2-D binary matrix")
        return arr

    @field_validator("valid_pairs", mode="before")
    @classmethod
    def _as_pairs(cls, value):
        if value is None:
            return None
        return tuple((int(i), int(j)) for i, j in value)

    @model_validator(mode="after")
    def _check_shapes(self):
        n_find, dim = self.find_tokens.shape
        n_frames, frame_dim = self.frame_tokens.shape
        if dim != frame_dim:
            raise ValueError(f"find tokens have {dim} channels, frame tokens {frame_dim}")
        if self.labels.shape != (n_find, n_frames):
            raise ValueError(f"labels must have shape {(n_find, n_frames)}, got {self.labels.shape}")
        if self.valid_pairs is not None:
            for i, j in self.valid_pairs:
                if not (0 <= i < n_find and 0 <= j < n_frames):
                    raise ValueError(f"valid pair {(i, j)} outside the {n_find}x{n_frames} grid")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.find_tokens.shape[0], self.frame_tokens.shape[0]

    def omega_mask(self) -> np.ndarray:
        """Boolean N_f x L_t mask of the valid pairs."""
        if self.valid_pairs is None:
            return np.ones(self.shape, dtype=bool)
        mask = np.zeros(self.shape, dtype=bool)
        for i, j in self.valid_pairs:
            mask[i, j] = True
        return mask


def pool_frame_tokens(groups: Sequence[Sequence[Sequence[float]]]) -> np.ndarray:
    """
    Average-pool each frame's token group into one frame representation.

    Args:
        groups: One non-empty group of C-dim vectors per frame

    Returns:
        L_t x C matrix of group means
    """
    if not groups:
        raise ValidationError("no token groups given")
    rows = []
    for t, group in enumerate(groups):
        arr = np.asarray(group, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValidationError(f"token group {t} is empty")
        rows.append(arr.mean(axis=0))
    if len({row.shape for row in rows}) != 1:
        raise ValidationError("token groups have inconsistent channel counts")
    return np.vstack(rows)


def similarity_matrix(tm: TokenMatrix) -> np.ndarray:
    """Cosine similarity of every (find, frame) pair divided by the temperature."""
    find = tm.find_tokens / np.linalg.norm(tm.find_tokens, axis=1, keepdims=True)
    frames = tm.frame_tokens / np.linalg.norm(tm.frame_tokens, axis=1, keepdims=True)
    cosine = np.clip(find @ frames.T, -1.0, 1.0)
    return cosine / tm.temperature


def _check_logits(logits: np.ndarray, tm: TokenMatrix) -> Tuple[np.ndarray, np.ndarray]:
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != tm.shape:
        raise ValidationError(f"logits must have shape {tm.shape}, got {logits.shape}")
    mask = tm.omega_mask()
    if not mask.any():
        raise ValidationError("the valid-pair set is empty")
    return logits, mask


def find_loss(logits: np.ndarray, tm: TokenMatrix) -> float:
    """
    Weighted binary matching loss averaged over the valid pairs.

    mean over valid (i, j) of
        -lambda_p * y * log sigma(l) - (1 - y) * log(1 - sigma(l))
    with log arguments floored at 1e-12.
    """
    logits, mask = _check_logits(logits, tm)
    y = tm.labels
    log_pos = np.log(np.maximum(sigmoid(logits), LOG_FLOOR))
    log_neg = np.log(np.maximum(sigmoid(-logits), LOG_FLOOR))
    per_pair = -tm.positive_weight * y * log_pos - (1.0 - y) * log_neg
    return float(per_pair[mask].sum() / mask.sum())


def find_loss_grad(logits: np.ndarray, tm: TokenMatrix) -> np.ndarray:
    """Analytic derivative of ``find_loss`` with respect to the logits (zero outside the valid set)."""
    logits, mask = _check_logits(logits, tm)
    y = tm.labels
    s = sigmoid(logits)
    grad = (tm.positive_weight * y * (s - 1.0) + (1.0 - y) * s) / mask.sum()
    return np.where(mask, grad, 0.0)


def finite_difference_grad(logits: np.ndarray, tm: TokenMatrix, step: float = 1e-5) -> np.ndarray:
    """Central finite-difference estimate of the loss gradient."""
    logits, _ = _check_logits(logits, tm)
    grad = np.zeros_like(logits)
    for idx in np.ndindex(*logits.shape):
        bumped = logits.copy()
        bumped[idx] += step
        upper = find_loss(bumped, tm)
        bumped[idx] -= 2 * step
        lower = find_loss(bumped, tm)
        grad[idx] = (upper - lower) / (2 * step)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """Largest elementwise |a - n| / max(|a|, |n|, floor)."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def inference_scores(tm: TokenMatrix, row: int = 0) -> RawScoreCurve:
    """Raw per-frame scores of one [FIND] token (one row of the similarity matrix)."""
    n_find, _ = tm.shape
    if not 0 <= row < n_find:
        raise ValidationError(f"find-token row {row} outside [0, {n_find})")
    return RawScoreCurve.from_values(similarity_matrix(tm)[row])


def inference_curves(tm: TokenMatrix) -> List[RawScoreCurve]:
    """One raw curve per [FIND] token, processed independently."""
    return [inference_scores(tm, row) for row in range(tm.shape[0])]
