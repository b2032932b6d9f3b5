"""Tracker ports used by mask propagation"""

from .base_tracker import TrackerPort, TrackerState, TrackStep, Prediction
from .mock_tracker import MockTracker, MockTrackerParams, degrade_mask

__all__ = [
    "TrackerPort",
    "TrackerState",
    "TrackStep",
    "Prediction",
    "MockTracker",
    "MockTrackerParams",
    "degrade_mask",
]
