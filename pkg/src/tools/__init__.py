"""
Numeric kernels: curves, grounding, sampling, [FIND]-token matching and metrics.
"""

from .curve import RawScoreCurve, SimilarityCurve, activate, condition_raw_curve, gaussian_smooth, resample_linear
from .grounding import ground, interval_iou, moment_center, extract_segments, tsg_metrics, theta_sweep
from .matching import TokenMatrix, find_loss, find_loss_grad, inference_scores, similarity_matrix
from .metrics import MaskFrame, boundary_f, ciou, jf_summary, region_j
from .rng import RngStream
from .sampling import STRATEGIES, SampleSet, mcs, sample_frames

__all__ = [
    "MaskFrame",
    "RawScoreCurve",
    "RngStream",
    "STRATEGIES",
    "SampleSet",
    "SimilarityCurve",
    "TokenMatrix",
    "activate",
    "boundary_f",
    "ciou",
    "condition_raw_curve",
    "extract_segments",
    "find_loss",
    "find_loss_grad",
    "gaussian_smooth",
    "ground",
    "inference_scores",
    "interval_iou",
    "jf_summary",
    "mcs",
    "moment_center",
    "region_j",
    "resample_linear",
    "sample_frames",
    "similarity_matrix",
    "theta_sweep",
    "tsg_metrics",
]
