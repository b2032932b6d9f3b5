"""
State schema for the grounding-sampling-propagation graph.
"""

import operator
from typing import Annotated, List, Optional, TypedDict

from src.tools.curve import SimilarityCurve
from src.tools.grounding import GroundingResult
from src.tools.metrics import JFSummary
from src.tools.sampling import SampleSet
from src.workflows.propagation import PropagationResult


class PipelineState(TypedDict, total=False):
    """
    State passed between nodes of the pipeline graph.

    Nodes return partial updates; ``messages`` accumulates across nodes.
    """
    # Input
    scenario_name: str
    horizon: int
    gt_interval: tuple
    curve: SimilarityCurve

    # Stage outputs
    conditioned: SimilarityCurve
    grounding: GroundingResult
    tsg_iou: float
    samples: SampleSet
    start_frame: int
    propagation: PropagationResult
    summary: JFSummary

    # Control
    current_step: str
    error: Optional[str]
    messages: Annotated[List[str], operator.add]
