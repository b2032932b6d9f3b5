"""
Tests for the command-line interface.
"""

import json

import pandas as pd
import pytest

from src.cli import build_parser, main, parse_seeds
from src.errors import ValidationError
from src.workflows.comparison import RESULT_COLUMNS


@pytest.fixture
def indicator_curve(tmp_path):
    """Curve file that is 1 on frames 10..15 and 0 elsewhere"""
    values = [1.0 if 10 <= t <= 15 else 0.0 for t in range(30)]
    path = tmp_path / "curve.json"
    path.write_text(json.dumps({"length": 30, "values": values}))
    return path


@pytest.fixture
def scenario_file(tmp_path):
    """Late-target scenario written by the gen command"""
    path = tmp_path / "scenario.json"
    assert main(["gen", "--preset", "late-target", "--seed", "0", "-o", str(path)]) == 0
    return path


class TestParseSeeds:
    """Seed list parsing"""

    def test_inclusive_range(self):
        assert parse_seeds("0..19") == list(range(20))

    def test_comma_list(self):
        assert parse_seeds("1, 4,9") == [1, 4, 9]

    @pytest.mark.parametrize("text", ["5..2", "a..3", "1,x"])
    def test_malformed(self, text):
        with pytest.raises(ValidationError):
            parse_seeds(text)


class TestCommands:
    """End-to-end runs of the subcommands"""

    def test_parser_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_gen_to_stdout(self, capsys):
        assert main(["gen", "--preset", "perfect"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["name"] == "perfect"
        assert data["horizon"] > 0

    def test_ground_reports_iou(self, indicator_curve, capsys):
        assert main(["ground", "--curve", str(indicator_curve), "--gt", "10,15"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["interval"] == [10, 15]
        assert data["best"] == [10, 15]
        assert data["iou"] == pytest.approx(1.0)

    def test_sample_writes_output_file(self, indicator_curve, tmp_path):
        out = tmp_path / "samples.json"
        code = main(["sample", "--curve", str(indicator_curve), "--strategy", "mcs", "--k", "5", "-o", str(out)])
        assert code == 0
        data = json.loads(out.read_text())
        assert len(data["indices"]) == 5
        assert data["indices"] == sorted(set(data["indices"]))
        assert data["center"] in data["indices"]

    def test_missing_file_is_invalid_input(self, tmp_path):
        assert main(["sample", "--curve", str(tmp_path / "nope.json")]) == 2

    def test_out_of_range_curve_is_invalid_input(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"values": [0.2, 1.5]}))
        assert main(["ground", "--curve", str(path)]) == 2

    def test_loss_with_grad_check(self, tmp_path, capsys):
        path = tmp_path / "tokens.json"
        path.write_text(json.dumps({
            "find": [[1.0, 0.5]],
            "frames": [[1.0, 0.0], [0.0, 1.0], [0.3, 0.4]],
            "labels": [[1, 0, 0]],
        }))
        assert main(["loss", "--tokens", str(path), "--grad-check"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["shape"] == [1, 3]
        assert data["loss"] > 0
        assert data["max_rel_error"] < 1e-4

    def test_pipeline(self, scenario_file, capsys):
        assert main(["pipeline", "--scenario", str(scenario_file), "--k", "6"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["strategy"] == "mcs"
        assert data["anchor_protocol"] == "center"
        assert 0.0 <= data["summary"]["jf"] <= 1.0

    def test_propagate_ablation(self, scenario_file, capsys):
        assert main(["propagate", "--scenario", str(scenario_file), "--ablation"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert [row["config"] for row in data["ablation"]] == [
            "forward_baseline", "anchor_updating", "adaptive_clearing", "bidirectional",
        ]
        assert data["start_frame"] in data["anchors"]

    def test_propagate_csv(self, scenario_file, tmp_path):
        out = tmp_path / "frames.csv"
        assert main(["propagate", "--scenario", str(scenario_file), "--csv", "-o", str(out)]) == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["frame", "j", "f", "track_score", "anchor", "cleared"]
        assert len(frame) == 90

    def test_compare_writes_csv_and_json(self, tmp_path):
        out = tmp_path / "results.csv"
        code = main([
            "compare", "--preset", "late-target", "--strategies", "firstk,mcs",
            "--seeds", "0..1", "--workers", "2", "--json", "-o", str(out),
        ])
        assert code == 0
        table = pd.read_csv(out)
        assert list(table.columns) == RESULT_COLUMNS
        assert len(table) == 4
        data = json.loads((tmp_path / "results.json").read_text())
        assert len(data["runs"]) == 4

    def test_compare_unknown_strategy(self, capsys):
        assert main(["compare", "--strategies", "mcs,psychic"]) == 2

    def test_compare_unknown_preset(self):
        assert main(["compare", "--preset", "nowhere"]) == 2

    def test_tsg_sweep(self, capsys):
        assert main(["tsg-sweep", "--preset", "late-target", "--thetas", "0.3,0.5"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("theta")
        assert len(out.strip().splitlines()) == 3


class TestExplicitArguments:
    """Explicit zero or negative values are rejected, never replaced by defaults"""

    @pytest.mark.parametrize("extra", [
        ["--k", "0"],
        ["--window", "0"],
        ["--seed", "-1"],
    ])
    def test_sample_rejects_bad_values(self, indicator_curve, extra, capsys):
        code = main(["sample", "--curve", str(indicator_curve), "--strategy", "firstk", *extra])
        assert code == 2
        assert capsys.readouterr().out == ""

    def test_ground_rejects_zero_window(self, indicator_curve):
        assert main(["ground", "--curve", str(indicator_curve), "--window", "0"]) == 2

    def test_ground_rejects_zero_theta(self, indicator_curve):
        assert main(["ground", "--curve", str(indicator_curve), "--theta", "0"]) == 2

    def test_propagate_rejects_zero_k(self, scenario_file):
        assert main(["propagate", "--scenario", str(scenario_file), "--k", "0"]) == 2

    def test_compare_rejects_zero_workers(self):
        assert main(["compare", "--strategies", "mcs", "--workers", "0"]) == 2

    def test_compare_rejects_zero_in_k_sweep(self):
        assert main(["compare", "--strategies", "mcs", "--k", "4,0"]) == 2

    def test_ground_segments_carry_scores(self, indicator_curve, capsys):
        assert main(["ground", "--curve", str(indicator_curve)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["segments"] == [{"start": 10, "end": 15, "score": 1.0}]
        assert data["best"]["score"] == 1.0


class TestFrameBudgetSweep:
    """compare --k with several values runs every K"""

    def test_each_k_gets_rows_and_summary(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main([
            "compare", "--preset", "late-target", "--strategies", "uniform,mcs",
            "--k", "16,4,8", "--seeds", "0..1", "--json", "-o", str(out),
        ])
        assert code == 0
        table = pd.read_csv(out)
        assert len(table) == 2 * 3 * 2
        assert table.groupby(["strategy", "k"]).size().to_dict() == {
            (s, k): 2 for s in ("uniform", "mcs") for k in (4, 8, 16)
        }
        summary = json.loads((tmp_path / "sweep.json").read_text())["summary"]
        assert [(row["strategy"], row["k"]) for row in summary] == [
            ("uniform", 4), ("uniform", 8), ("uniform", 16),
            ("mcs", 4), ("mcs", 8), ("mcs", 16),
        ]
        assert all(row["runs"] == 2 for row in summary)
