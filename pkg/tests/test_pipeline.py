"""
Tests for the LangGraph pipeline and strategy comparison.
"""

import io
from concurrent.futures import ThreadPoolExecutor

import pandas as pd
import pytest

from src.errors import ValidationError
from src.tools.sampling import STRATEGIES
from src.workflows.comparison import RESULT_COLUMNS, compare_strategies, summarize
from src.workflows import pipeline as pipeline_module
from src.workflows.pipeline import MomentSegPipeline, PipelineParams, get_pipeline, run_pipeline
from src.workflows.scenario import gen_scenario, late_target_config, perfect_tracker_config


@pytest.fixture(scope="module")
def late_target():
    return gen_scenario(late_target_config(), seed=0)


@pytest.fixture(scope="module")
def perfect():
    return gen_scenario(perfect_tracker_config(), seed=0)


class TestPipeline:
    """Tests for a single end-to-end run"""

    @pytest.fixture
    def pipeline(self):
        return MomentSegPipeline()

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_perfect_tracker_scores_one(self, pipeline, perfect, strategy):
        result = pipeline.run(perfect, PipelineParams(strategy=strategy, seed=3))
        assert result.summary.jf == pytest.approx(1.0, abs=1e-12)

    def test_indicator_curve_grounds_exactly(self, pipeline):
        config = {
            "name": "indicator",
            "horizon": 60,
            "gt_interval": (20, 35),
            "curve_model": {"plateaus": [{"start": 20, "end": 35, "amplitude": 1.0}]},
        }
        result = pipeline.run(gen_scenario(config, seed=0), PipelineParams(theta=0.4))
        assert result.tsg_iou == 1.0
        assert result.grounding.interval == (20, 35)

    def test_anchor_protocol(self, pipeline, late_target):
        mcs = pipeline.run(late_target, PipelineParams(strategy="mcs"))
        assert mcs.anchor_protocol == "center"
        assert mcs.start_frame == mcs.grounding.moment.center
        assert mcs.start_frame in mcs.samples.indices

        first = pipeline.run(late_target, PipelineParams(strategy="firstk"))
        assert first.anchor_protocol == "first-sample"
        assert first.start_frame == 0

    def test_metrics_in_unit_interval(self, pipeline, late_target):
        result = pipeline.run(late_target, PipelineParams(strategy="random", seed=4))
        row = result.as_row()
        for key in ("jf", "j_mean", "f_mean", "tsg_iou"):
            assert 0.0 <= row[key] <= 1.0
        assert len(result.summary.j_per_frame) == late_target.scenario.horizon
        assert len(result.samples.indices) == 8

    def test_deterministic(self, pipeline, late_target):
        a = pipeline.run(late_target, PipelineParams(strategy="mcs", seed=11))
        b = pipeline.run(late_target, PipelineParams(strategy="mcs", seed=11))
        assert a.as_row() == b.as_row()
        assert a.samples == b.samples

    def test_run_pipeline_overrides(self, late_target):
        result = run_pipeline(late_target, strategy="uniform", k=4)
        assert result.k == 4
        assert result.samples.indices == (0, 30, 59, 89)

    def test_invalid_strategy(self, late_target):
        with pytest.raises(ValidationError):
            run_pipeline(late_target, strategy="everyother")


class TestSharedPipeline:
    """Tests for the process-wide pipeline instance"""

    def test_concurrent_callers_share_one_pipeline(self, monkeypatch):
        monkeypatch.setattr(pipeline_module, "_default_pipeline", None)
        with ThreadPoolExecutor(max_workers=8) as pool:
            pipelines = list(pool.map(lambda _: get_pipeline(), range(32)))
        assert all(p is pipelines[0] for p in pipelines)
        assert isinstance(pipelines[0], MomentSegPipeline)


class TestComparison:
    """Tests for the parallel strategy comparison"""

    def test_perfect_corpus_ties(self, perfect):
        result = compare_strategies([perfect], STRATEGIES, PipelineParams(), seeds=[0, 1, 2])
        summary = result.summary()
        assert summary["jf_mean"].tolist() == pytest.approx([1.0] * len(STRATEGIES))
        assert summary["jf_std"].tolist() == pytest.approx([0.0] * len(STRATEGIES), abs=1e-12)

    def test_single_run_matches_pipeline(self, late_target):
        params = PipelineParams(seed=0)
        result = compare_strategies([late_target], ["mcs"], params, seeds=[0])
        direct = run_pipeline(late_target, params.model_copy(update={"strategy": "mcs", "seed": 0}))
        assert result.summary().loc[0, "jf_mean"] == direct.summary.jf
        assert result.summary().loc[0, "tsg_iou_mean"] == direct.tsg_iou

    def test_rows_sorted_and_columns_fixed(self, late_target):
        result = compare_strategies([late_target], ["mcs", "firstk"], seeds=[2, 0, 1], max_workers=3)
        table = result.table()
        assert list(table.columns) == RESULT_COLUMNS
        assert table["strategy"].tolist() == ["mcs"] * 3 + ["firstk"] * 3
        assert table["seed"].tolist() == [0, 1, 2, 0, 1, 2]

    def test_mean_equals_run_average(self, late_target):
        result = compare_strategies([late_target], ["random"], seeds=range(5))
        runs = [run.summary.jf for run in result.runs]
        assert result.summary().loc[0, "jf_mean"] == pytest.approx(sum(runs) / len(runs), abs=1e-12)

    def test_csv_independent_of_worker_count(self, late_target):
        corpus = [late_target, gen_scenario(late_target_config("other"), seed=1)]
        outputs = []
        for workers in (1, 8):
            result = compare_strategies(corpus, ["random", "mcs", "uniform"], seeds=range(4), max_workers=workers)
            buffer = io.StringIO()
            result.table().to_csv(buffer, index=False, lineterminator="\n")
            outputs.append(buffer.getvalue())
        assert outputs[0] == outputs[1]

    def test_late_target_ordering(self, late_target):
        """Moment-centric sampling leads on a late, drifting target"""
        result = compare_strategies(
            [late_target],
            ["mcs", "nearbyk", "uniform", "firstk", "random"],
            seeds=range(20),
            max_workers=4,
        )
        summary = result.summary().set_index("strategy")
        means = summary["jf_mean"]
        assert means["mcs"] >= means["nearbyk"] >= means["uniform"] >= means["firstk"]
        for deterministic in ("nearbyk", "uniform", "firstk"):
            assert summary.loc[deterministic, "jf_std"] < 1e-12
            assert summary.loc["random", "jf_std"] > summary.loc[deterministic, "jf_std"]
        assert result.ranking()[-1] == "firstk"

    def test_invalid_inputs(self, late_target):
        with pytest.raises(ValidationError):
            compare_strategies([], ["mcs"])
        with pytest.raises(ValidationError):
            compare_strategies([late_target], ["mcs"], seeds=[])
        with pytest.raises(ValidationError):
            compare_strategies([late_target], ["bogus"])
        with pytest.raises(ValidationError):
            compare_strategies([late_target], ["mcs"], max_workers=0)
        with pytest.raises(ValidationError):
            compare_strategies([late_target], ["mcs"], ks=[0, 4])

    def test_frame_budget_sweep(self, late_target):
        """Every strategy runs at every K; the summary has one row per (strategy, K)"""
        result = compare_strategies([late_target], ["uniform", "mcs"], seeds=[0, 1], ks=[8, 4, 8])
        table = result.table()
        assert result.ks == [4, 8]
        assert len(table) == 8
        assert table["k"].tolist() == [4, 4, 8, 8, 4, 4, 8, 8]
        summary = result.summary()
        assert list(zip(summary["strategy"], summary["k"])) == [("uniform", 4), ("uniform", 8), ("mcs", 4), ("mcs", 8)]
        assert summary["runs"].tolist() == [2, 2, 2, 2]
        assert sorted(result.ranking()) == ["mcs", "uniform"]

    def test_summarize_empty(self):
        with pytest.raises(ValidationError):
            summarize(pd.DataFrame(columns=RESULT_COLUMNS))
