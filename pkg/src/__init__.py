"""MomentSeg Toolkit - temporal grounding, moment-centric sampling and anchor-updated propagation"""

__version__ = "0.1.0"
