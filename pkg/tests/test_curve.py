"""
Tests for similarity-curve conditioning.
"""

import math

import numpy as np
import pytest

from src.errors import DegenerateWeights, ValidationError
from src.tools.curve import (
    RawScoreCurve,
    SimilarityCurve,
    activate,
    as_similarity,
    condition_raw_curve,
    gaussian_kernel,
    gaussian_smooth,
    normalize_weights,
    resample_linear,
    sigmoid,
    smooth_clamped,
)


class TestCurveTypes:
    """Tests for curve construction and validation"""

    def test_similarity_curve_rejects_out_of_range(self):
        """Similarity values must lie in [0, 1]"""
        with pytest.raises(ValidationError):
            SimilarityCurve.from_values([0.2, 1.5])

    def test_raw_curve_accepts_unbounded_values(self):
        """Raw curves only require finite values"""
        curve = RawScoreCurve.from_values([-40.0, 0.0, 12.5])
        assert curve.length == 3

    def test_non_finite_values_rejected(self):
        """NaN and infinity are validation errors"""
        with pytest.raises(ValidationError):
            RawScoreCurve.from_values([0.0, float("nan")])
        with pytest.raises(ValidationError):
            RawScoreCurve.from_values([float("inf")])

    def test_empty_curve_rejected(self):
        """A curve needs at least one frame"""
        with pytest.raises(ValidationError):
            SimilarityCurve.from_values([])


class TestActivate:
    """Tests for sigmoid activation"""

    def test_known_values(self):
        """sigmoid(0) = 0.5 and the map is symmetric"""
        out = activate(RawScoreCurve.from_values([0.0, 2.0, -2.0]))
        assert out.values[0] == 0.5
        assert out.values[1] == pytest.approx(1 / (1 + math.exp(-2)), abs=1e-15)
        assert out.values[1] + out.values[2] == pytest.approx(1.0, abs=1e-15)

    def test_extreme_logits_stay_in_range(self):
        """Huge logits saturate without overflow"""
        out = activate(RawScoreCurve.from_values([-1000.0, 1000.0]))
        assert out.values == (0.0, 1.0)

    def test_sigmoid_is_monotone(self):
        x = np.linspace(-30, 30, 301)
        assert np.all(np.diff(sigmoid(x)) >= 0)


class TestGaussianSmooth:
    """Tests for reflect-padded Gaussian smoothing"""

    def test_kernel_is_normalized_and_symmetric(self):
        kernel = gaussian_kernel(1.5, 4)
        assert kernel.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(kernel, kernel[::-1])

    def test_constant_curve_unchanged(self):
        """Smoothing preserves constants exactly"""
        curve = SimilarityCurve.from_values([0.3] * 20)
        assert gaussian_smooth(curve, 1.0, 3).values == curve.values

    def test_preserves_length_and_bounds(self):
        """Output stays within the input min/max"""
        rng = np.random.default_rng(0)
        values = rng.random(50)
        out = gaussian_smooth(SimilarityCurve.from_values(values), 2.0, 5)
        assert out.length == 50
        assert min(out.values) >= values.min()
        assert max(out.values) <= values.max()

    def test_impulse_spreads_symmetrically(self):
        """A centered impulse becomes the kernel itself"""
        values = [0.0] * 11
        values[5] = 1.0
        out = gaussian_smooth(SimilarityCurve.from_values(values), 1.0, 2)
        kernel = gaussian_kernel(1.0, 2)
        assert np.allclose(out.values[3:8], kernel)
        assert out.values[4] == pytest.approx(out.values[6])

    def test_matches_direct_convolution_oracle(self):
        """Interior values equal an explicit weighted sum"""
        values = np.linspace(0, 1, 12) ** 2
        out = gaussian_smooth(SimilarityCurve.from_values(values), 1.0, 2).as_array()
        kernel = gaussian_kernel(1.0, 2)
        for t in range(2, 10):
            assert out[t] == pytest.approx(sum(kernel[j + 2] * values[t + j] for j in range(-2, 3)), abs=1e-12)

    def test_radius_must_be_smaller_than_length(self):
        with pytest.raises(ValidationError):
            gaussian_smooth(SimilarityCurve.from_values([0.1, 0.2, 0.3]), 1.0, 3)

    def test_invalid_kernel_parameters(self):
        with pytest.raises(ValidationError):
            gaussian_kernel(0.0, 2)
        with pytest.raises(ValidationError):
            gaussian_kernel(1.0, 0)

    def test_smooth_clamped_handles_short_curves(self):
        """Radius is clamped; single frames pass through"""
        single = SimilarityCurve.from_values([0.7])
        assert smooth_clamped(single, 1.0, 3) is single
        assert smooth_clamped(SimilarityCurve.from_values([0.0, 1.0, 0.0]), 1.0, 3).length == 3


class TestResample:
    """Tests for align-corners linear resampling"""

    def test_identity_when_length_matches(self):
        curve = SimilarityCurve.from_values([0.1, 0.5, 0.9])
        assert resample_linear(curve, 3) is curve

    def test_upsample_interpolates_linearly(self):
        """Endpoints are kept and midpoints interpolated"""
        out = resample_linear(SimilarityCurve.from_values([0.0, 1.0]), 5)
        assert out.values == pytest.approx((0.0, 0.25, 0.5, 0.75, 1.0))

    def test_downsample_keeps_corners(self):
        values = np.linspace(0.0, 1.0, 9)
        out = resample_linear(SimilarityCurve.from_values(values), 3)
        assert out.values == pytest.approx((0.0, 0.5, 1.0))

    def test_single_frame_edge_cases(self):
        """Length-1 source broadcasts; length-1 target takes the middle value"""
        assert resample_linear(SimilarityCurve.from_values([0.4]), 4).values == (0.4,) * 4
        assert resample_linear(SimilarityCurve.from_values([0.1, 0.2, 0.3]), 1).values == (0.2,)

    def test_monotone_input_stays_monotone(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            values = np.sort(rng.random(int(rng.integers(1, 50))))
            target = int(rng.integers(1, 120))
            up = np.array(resample_linear(SimilarityCurve.from_values(values), target).values)
            assert np.all(np.diff(up) >= -1e-12)
            down = np.array(resample_linear(SimilarityCurve.from_values(values[::-1]), target).values)
            assert np.all(np.diff(down) <= 1e-12)

    def test_preserves_curve_kind(self):
        raw = RawScoreCurve.from_values([-3.0, 3.0])
        out = resample_linear(raw, 4)
        assert type(out) is RawScoreCurve

    def test_invalid_target(self):
        with pytest.raises(ValidationError):
            resample_linear(SimilarityCurve.from_values([0.1]), 0)


class TestNormalizeWeights:
    """Tests for weight normalization"""

    def test_sums_to_one(self):
        probs = normalize_weights([1.0, 3.0, 0.0])
        assert probs.tolist() == [0.25, 0.75, 0.0]

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateWeights):
            normalize_weights([0.0, 0.0])

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            normalize_weights([0.5, -0.1])


class TestConditioning:
    """Tests for the resample -> activate -> smooth chain"""

    def test_chain_order(self):
        """Equivalent to the three steps applied by hand"""
        raw = RawScoreCurve.from_values([-4.0, -1.0, 2.0, 5.0, 1.0, -3.0])
        expected = gaussian_smooth(activate(resample_linear(raw, 12)), 1.0, 3)
        assert condition_raw_curve(raw, 12, 1.0, 3).values == expected.values

    def test_single_frame_target_skips_smoothing(self):
        out = condition_raw_curve(RawScoreCurve.from_values([0.0, 0.0, 0.0]), 1, 1.0, 3)
        assert out.values == (0.5,)

    def test_as_similarity_dispatch(self):
        """Similarity curves are only resampled; raw curves are conditioned"""
        sim = SimilarityCurve.from_values([0.0, 1.0])
        assert as_similarity(sim).values == (0.0, 1.0)
        raw = RawScoreCurve.from_values([0.0, 0.0])
        assert as_similarity(raw, 4).values == pytest.approx((0.5,) * 4)
