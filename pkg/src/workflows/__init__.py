"""
Workflows: scenario generation, propagation, the pipeline graph and strategy comparison.
"""

from .comparison import ComparisonResult, compare_strategies, summarize
from .pipeline import MomentSegPipeline, PipelineParams, RunResult, run_pipeline
from .propagation import (
    ABLATION_STEPS,
    PropagationConfig,
    PropagationPlan,
    PropagationResult,
    UpdateLog,
    plan_bap,
    run_bap,
    run_forward_baseline,
    run_propagation,
)
from .scenario import GeneratedScenario, Scenario, gen_scenario, load_corpus, load_scenario

__all__ = [
    "ABLATION_STEPS",
    "ComparisonResult",
    "GeneratedScenario",
    "MomentSegPipeline",
    "PipelineParams",
    "PropagationConfig",
    "PropagationPlan",
    "PropagationResult",
    "RunResult",
    "Scenario",
    "UpdateLog",
    "compare_strategies",
    "gen_scenario",
    "load_corpus",
    "load_scenario",
    "plan_bap",
    "run_bap",
    "run_forward_baseline",
    "run_pipeline",
    "run_propagation",
    "summarize",
]
