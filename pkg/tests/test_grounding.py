"""
Tests for moment detection, segment extraction and TSG metrics.
"""

import math

import numpy as np
import pytest

from src.errors import ValidationError
from src.tools.curve import SimilarityCurve
from src.tools.grounding import (
    Segment,
    best_segment,
    default_window,
    extract_segments,
    ground,
    interval_iou,
    moment_center,
    theta_sweep,
    tsg_metrics,
)


def _curve(values):
    return SimilarityCurve.from_values(values)


def _brute_force_center(values, w):
    sums = [math.fsum(values[i:i + w]) for i in range(len(values) - w + 1)]
    best = max(sums)
    start = sums.index(best)
    return start + w // 2


class TestMomentCenter:
    """Tests for the maximal-window search"""

    def test_peak_window(self):
        """The heaviest window wins"""
        result = moment_center(_curve([0, 0, 0.2, 0.9, 1.0, 0.8, 0.1, 0, 0, 0]), 3)
        assert result.window_start == 3
        assert result.center == 4
        assert result.interval == (3, 5)

    def test_ties_go_to_earliest_window(self):
        result = moment_center(_curve([0.5, 0.5, 0.5, 0.5]), 2)
        assert result.window_start == 0
        assert result.center == 1

    def test_full_window(self):
        """w = T covers the whole curve"""
        result = moment_center(_curve([0.1, 0.2, 0.3, 0.4, 0.5]), 5)
        assert result.window_start == 0
        assert result.center == 2

    def test_single_frame_window_is_argmax(self):
        assert moment_center(_curve([0.1, 0.7, 0.3, 0.7]), 1).center == 1

    def test_invalid_window(self):
        with pytest.raises(ValidationError):
            moment_center(_curve([0.1, 0.2]), 3)
        with pytest.raises(ValidationError):
            moment_center(_curve([0.1, 0.2]), 0)

    def test_matches_exhaustive_scan(self):
        """Random curves agree with an independent window-sum scan"""
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            length = int(rng.integers(1, 201))
            w = int(rng.integers(1, length + 1))
            # quantized values produce frequent exact ties
            values = (rng.integers(0, 5, size=length) / 4.0).tolist()
            assert moment_center(_curve(values), w).center == _brute_force_center(values, w)

    def test_default_window(self):
        assert default_window(1) == 1
        assert default_window(9) == 1
        assert default_window(90) == 9
        assert default_window(91) == 10
        with pytest.raises(ValidationError):
            default_window(0)


class TestSegments:
    """Tests for threshold post-processing"""

    def test_maximal_runs(self):
        segments = extract_segments(_curve([0.1, 0.5, 0.6, 0.2, 0.4, 0.4, 0.4]), 0.4)
        assert [s.interval for s in segments] == [(1, 2), (4, 6)]
        assert segments[0].score == pytest.approx(0.55)

    def test_random_curves_give_maximal_covering_runs(self):
        """Segments cover exactly the frames >= theta, each run bounded by sub-threshold frames"""
        rng = np.random.default_rng(11)
        for _ in range(500):
            values = rng.random(int(rng.integers(1, 80))).tolist()
            theta = float(rng.uniform(0.05, 0.95))
            segments = extract_segments(_curve(values), theta)
            covered = set()
            for seg in segments:
                run = range(seg.start, seg.end + 1)
                assert all(values[t] >= theta for t in run)
                assert seg.start == 0 or values[seg.start - 1] < theta
                assert seg.end == len(values) - 1 or values[seg.end + 1] < theta
                covered.update(run)
            assert covered == {t for t, v in enumerate(values) if v >= theta}

    def test_higher_theta_covers_less(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            curve = _curve(rng.random(int(rng.integers(1, 80))))
            low, high = sorted(rng.uniform(0.05, 0.95, size=2))

            def coverage(theta):
                return {t for seg in extract_segments(curve, theta) for t in range(seg.start, seg.end + 1)}

            assert coverage(high) <= coverage(low)

    def test_no_frame_passes(self):
        assert extract_segments(_curve([0.1, 0.2]), 0.4) == []

    def test_theta_range(self):
        with pytest.raises(ValidationError):
            extract_segments(_curve([0.5]), 0.0)
        with pytest.raises(ValidationError):
            extract_segments(_curve([0.5]), 1.0)

    def test_best_segment_by_mass(self):
        """Longer moderate run beats a short spike"""
        curve = _curve([1.0, 0.0, 0.5, 0.5, 0.5, 0.0])
        segments = extract_segments(curve, 0.4)
        assert best_segment(segments, curve).interval == (2, 4)

    def test_best_segment_tie_goes_to_earliest(self):
        curve = _curve([0.6, 0.0, 0.6])
        assert best_segment(extract_segments(curve, 0.5), curve).interval == (0, 0)

    def test_best_segment_empty(self):
        assert best_segment([], _curve([0.1])) is None

    def test_best_segment_out_of_range(self):
        with pytest.raises(ValidationError):
            best_segment([Segment(start=0, end=4, score=0.5)], _curve([0.5, 0.5]))


class TestGround:
    """Tests for the combined grounding stage"""

    def test_indicator_curve_recovers_interval(self):
        """Zero-noise indicator curve grounds exactly"""
        values = [0.0] * 50
        for t in range(20, 31):
            values[t] = 1.0
        result = ground(_curve(values), 0.4)
        assert result.interval == (20, 30)
        assert interval_iou(result.interval, (20, 30)) == 1.0
        assert not result.used_fallback

    def test_falls_back_to_moment_window(self):
        """No segment above theta reports the moment window"""
        result = ground(_curve([0.0, 0.1, 0.3, 0.1, 0.0]), 0.4, window=3)
        assert result.used_fallback
        assert result.interval == result.moment.interval == (1, 3)


class TestIntervalIoU:
    """Tests for inclusive-interval IoU"""

    def test_partial_overlap(self):
        """[0,4] vs [2,6]: 3 shared frames of 7"""
        assert interval_iou((0, 4), (2, 6)) == pytest.approx(3 / 7)

    def test_identical_single_frame(self):
        assert interval_iou((5, 5), (5, 5)) == 1.0

    def test_disjoint_and_adjacent(self):
        assert interval_iou((0, 2), (5, 8)) == 0.0
        assert interval_iou((0, 2), (3, 4)) == 0.0

    def test_symmetric(self):
        assert interval_iou((1, 9), (4, 12)) == interval_iou((4, 12), (1, 9))

    def test_malformed(self):
        with pytest.raises(ValidationError):
            interval_iou((4, 2), (0, 1))


class TestTsgMetrics:
    """Tests for recall@IoU and mIoU"""

    def test_hand_built_pair(self):
        report = tsg_metrics([((0, 4), (2, 6))], (0.3, 0.5))
        assert report.recalls[0.3] == 1.0
        assert report.recalls[0.5] == 0.0
        assert report.mean_iou == pytest.approx(3 / 7, abs=1e-9)

    def test_missing_prediction_scores_zero(self):
        report = tsg_metrics([(None, (0, 3)), ((0, 3), (0, 3))])
        assert report.mean_iou == 0.5
        assert report.recalls[0.7] == 0.5
        assert report.count == 2

    def test_row_format(self):
        row = tsg_metrics([((0, 1), (0, 1))]).as_row()
        assert list(row) == ["R@0.3", "R@0.5", "R@0.7", "mIoU"]

    def test_empty_and_invalid(self):
        with pytest.raises(ValidationError):
            tsg_metrics([])
        with pytest.raises(ValidationError):
            tsg_metrics([((0, 1), (0, 1))], (0.0,))


class TestThetaSweep:
    """Tests for the post-processing threshold sweep"""

    def test_one_row_per_theta(self):
        values = [0.0] * 20
        for t in range(8, 13):
            values[t] = 0.45
        table = theta_sweep([(_curve(values), (8, 12))], thetas=(0.2, 0.4, 0.6))
        assert table["theta"].tolist() == [0.2, 0.4, 0.6]
        # 0.6 falls back to the moment window, which still overlaps the target
        assert table.loc[0, "mIoU"] == 1.0
        assert table.loc[1, "mIoU"] == 1.0
        assert table.loc[2, "mIoU"] < 1.0

    def test_requires_queries(self):
        with pytest.raises(ValidationError):
            theta_sweep([])
