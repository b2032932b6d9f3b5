"""
Strategy comparison over a scenario corpus, a set of frame budgets K and a
set of run seeds.

Runs execute concurrently; results are sorted by (strategy, K, scenario, seed)
before they are returned so output is independent of scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict

from src.errors import ValidationError
from src.tools.sampling import STRATEGIES
from src.workflows.pipeline import MomentSegPipeline, PipelineParams, RunResult
from src.workflows.scenario import GeneratedScenario

logger = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1
RESULT_COLUMNS = ["strategy", "seed", "k", "jf", "j_mean", "f_mean", "tsg_iou", "n_updates"]
DEFAULT_STRATEGIES = ("firstk", "uniform", "nearbyk", "mcs")


class ComparisonResult(BaseModel):
    """Sorted per-run results of a strategy comparison."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    runs: List[RunResult]
    strategies: List[str]
    scenarios: List[str]
    seeds: List[int]
    ks: List[int]

    def table(self) -> pd.DataFrame:
        """One row per run with the fixed result columns."""
        return pd.DataFrame([run.as_row() for run in self.runs], columns=RESULT_COLUMNS)

    def summary(self) -> pd.DataFrame:
        return summarize(self.table(), order=self.strategies)

    def ranking(self) -> List[str]:
        """Strategies by descending mean J&F over all their runs; ties keep the requested order."""
        means = self.table().groupby("strategy")["jf"].mean()
        return sorted(self.strategies, key=lambda s: (-means[s], self.strategies.index(s)))

    def to_dict(self) -> Dict:
        return {
            "schema_version": CSV_SCHEMA_VERSION,
            "strategies": self.strategies,
            "scenarios": self.scenarios,
            "seeds": self.seeds,
            "ks": self.ks,
            "runs": [{"scenario": run.scenario, **run.as_row()} for run in self.runs],
            "summary": self.summary().to_dict(orient="records"),
        }


def summarize(table: pd.DataFrame, order: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """
    Mean and population standard deviation of J&F and TSG IoU per (strategy, K).

    Rows follow ``order`` for strategies (first appearance otherwise), then ascending K.

    Returns:
        DataFrame with strategy, k, runs, jf_mean, jf_std, tsg_iou_mean, tsg_iou_std, n_updates_mean
    """
    if table.empty:
        raise ValidationError("nothing to summarize")
    grouped = table.groupby(["strategy", "k"], sort=False)
    summary = pd.DataFrame({
        "runs": grouped.size(),
        "jf_mean": grouped["jf"].mean(),
        "jf_std": grouped["jf"].std(ddof=0),
        "tsg_iou_mean": grouped["tsg_iou"].mean(),
        "tsg_iou_std": grouped["tsg_iou"].std(ddof=0),
        "n_updates_mean": grouped["n_updates"].mean(),
    }).reset_index()
    strategies = list(order) if order is not None else list(dict.fromkeys(table["strategy"]))
    summary = summary[summary["strategy"].isin(strategies)]
    summary = summary.assign(_rank=summary["strategy"].map(strategies.index))
    summary = summary.sort_values(["_rank", "k"], kind="stable").drop(columns="_rank")
    return summary.reset_index(drop=True)


def compare_strategies(
    corpus: Sequence[GeneratedScenario],
    strategies: Sequence[str] = DEFAULT_STRATEGIES,
    params: Optional[PipelineParams] = None,
    seeds: Sequence[int] = (0,),
    max_workers: int = 4,
    ks: Optional[Sequence[int]] = None,
) -> ComparisonResult:
    """
    Run every (strategy, K, scenario, seed) combination.

    Args:
        corpus: Scenarios to evaluate
        strategies: Sampling strategies to compare
        params: Shared pipeline parameters; strategy, K and seed are replaced per run
        seeds: Run seeds
        max_workers: Worker threads
        ks: Frame budgets to sweep; defaults to ``params.k``

    Returns:
        ComparisonResult with runs sorted by (strategy order, K, scenario order, seed)

    Raises:
        ValidationError: empty corpus, seed, strategy or K list, an unknown
            strategy, a K below 1 or fewer than one worker
    """
    if not corpus or not seeds or not strategies:
        raise ValidationError("comparison needs at least one scenario, seed and strategy")
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        raise ValidationError(f"unknown strategies: {', '.join(unknown)}")
    if max_workers < 1:
        raise ValidationError(f"max_workers must be at least 1, got {max_workers}")
    params = params or PipelineParams.from_settings()
    ks = sorted(set(int(k) for k in ks)) if ks is not None else [params.k]
    if not ks or ks[0] < 1:
        raise ValidationError(f"K values must be at least 1, got {ks}")
    strategies = list(dict.fromkeys(strategies))
    seeds = sorted(set(int(s) for s in seeds))
    pipeline = MomentSegPipeline()

    jobs: List[Tuple[int, int, int, int]] = [
        (si, ki, ci, seed)
        for si in range(len(strategies))
        for ki in range(len(ks))
        for ci in range(len(corpus))
        for seed in seeds
    ]
    results: Dict[Tuple[int, int, int, int], RunResult] = {}

    def _run(job: Tuple[int, int, int, int]) -> RunResult:
        si, ki, ci, seed = job
        run_params = params.model_copy(update={"strategy": strategies[si], "k": ks[ki], "seed": seed})
        return pipeline.run(corpus[ci], run_params)

    logger.info("Running %d jobs on %d workers", len(jobs), max_workers)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_job = {executor.submit(_run, job): job for job in jobs}
        for future in as_completed(future_to_job):
            job = future_to_job[future]
            results[job] = future.result()

    return ComparisonResult(
        runs=[results[job] for job in sorted(results)],
        strategies=strategies,
        scenarios=[g.scenario.name for g in corpus],
        seeds=seeds,
        ks=ks,
    )
