"""Tests for the empirical-distribution primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from catbp_core import EmptySampleError, InvalidHorizonError, Path, PathKind
from catbp_engine.verify.statistics import (
    EmpiricalSample,
    MomentEstimate,
    ergodic_average,
    ks_critical_value,
    ks_one_sample,
    ks_two_sample,
    wasserstein1,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestEmpiricalSample:
    def test_sorted_and_read_only(self):
        sample = EmpiricalSample.of([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(sample.values, [1.0, 2.0, 3.0])
        assert len(sample) == sample.count == 3
        with pytest.raises(ValueError):
            sample.values[0] = 0.0

    def test_empty_sample_is_rejected_on_use(self):
        empty = EmpiricalSample.of([])
        with pytest.raises(EmptySampleError, match="here"):
            empty.require_nonempty("here")


# ---------------------------------------------------------------------------
# Kolmogorov–Smirnov
# ---------------------------------------------------------------------------


class TestKolmogorovSmirnov:
    @pytest.mark.parametrize("m", [1, 4, 25])
    def test_midpoint_quantiles(self, m):
        sample = EmpiricalSample.of((np.arange(m) + 0.5) / m)
        assert ks_one_sample(sample, stats.uniform.cdf) == pytest.approx(0.5 / m)

    def test_single_point_at_median(self):
        assert ks_one_sample(EmpiricalSample.of([0.0]), stats.norm.cdf) == pytest.approx(0.5)

    def test_two_sample_hand_case(self):
        assert ks_two_sample(EmpiricalSample.of([1.0, 2.0]), EmpiricalSample.of([1.5])) == pytest.approx(0.5)

    def test_disjoint_supports(self):
        assert ks_two_sample(EmpiricalSample.of([0.0, 1.0]), EmpiricalSample.of([5.0, 6.0, 7.0])) == 1.0

    @given(st.lists(finite, min_size=1, max_size=30))
    def test_identical_samples_have_zero_distance(self, values):
        sample = EmpiricalSample.of(values)
        assert ks_two_sample(sample, sample) == 0.0

    def test_empty_raises(self):
        with pytest.raises(EmptySampleError):
            ks_one_sample(EmpiricalSample.of([]), stats.norm.cdf)
        with pytest.raises(EmptySampleError):
            ks_two_sample(EmpiricalSample.of([1.0]), EmpiricalSample.of([]))

    def test_critical_value(self):
        assert ks_critical_value(10_000) == pytest.approx(1.358 / 100, rel=1e-3)
        with pytest.raises(EmptySampleError):
            ks_critical_value(0)


# ---------------------------------------------------------------------------
# Wasserstein-1
# ---------------------------------------------------------------------------


class TestWasserstein:
    def test_equal_counts(self):
        assert wasserstein1(EmpiricalSample.of([0.0, 1.0]), EmpiricalSample.of([0.0, 3.0])) == pytest.approx(1.0)

    def test_unequal_counts(self):
        assert wasserstein1(EmpiricalSample.of([0.0]), EmpiricalSample.of([1.0, 3.0])) == pytest.approx(2.0)

    @settings(max_examples=50)
    @given(st.lists(finite, min_size=1, max_size=30), st.floats(min_value=-100, max_value=100))
    def test_shift(self, values, shift):
        a = EmpiricalSample.of(values)
        b = EmpiricalSample.of(np.asarray(values) + shift)
        assert wasserstein1(a, b) == pytest.approx(abs(shift), abs=1e-6)

    def test_empty_raises(self):
        with pytest.raises(EmptySampleError):
            wasserstein1(EmpiricalSample.of([]), EmpiricalSample.of([1.0]))


# ---------------------------------------------------------------------------
# Time and ensemble averages
# ---------------------------------------------------------------------------


class TestErgodicAverage:
    def test_piecewise_constant(self):
        path = Path(np.array([0.0, 1.0, 2.0, 4.0]), np.array([1.0, 3.0, 5.0, 7.0]), PathKind.CONSTANT)
        assert ergodic_average(path, 1.0) == pytest.approx(13.0 / 3.0)
        assert ergodic_average(path, 0.0) == pytest.approx((1.0 + 3.0 + 10.0) / 4.0)

    def test_piecewise_linear(self):
        path = Path(np.array([0.0, 2.0]), np.array([0.0, 2.0]), PathKind.LINEAR)
        assert ergodic_average(path, 1.0) == pytest.approx(1.5)

    def test_burn_in_past_horizon(self):
        path = Path(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
        with pytest.raises(InvalidHorizonError):
            ergodic_average(path, 1.0)


class TestMomentEstimate:
    def test_small_sample(self):
        estimate = MomentEstimate.of([1.0, 2.0, 3.0, 4.0])
        assert estimate.count == 4
        assert estimate.mean == pytest.approx(2.5)
        assert estimate.variance == pytest.approx(5.0 / 3.0)
        assert estimate.mean_se == pytest.approx(math.sqrt(5.0 / 12.0))
        assert estimate.variance_se >= 0.0

    def test_constant_sample(self):
        estimate = MomentEstimate.of([2.0] * 10)
        assert (estimate.variance, estimate.mean_se, estimate.variance_se) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("values", [[], [1.0]])
    def test_needs_two_values(self, values):
        with pytest.raises(EmptySampleError):
            MomentEstimate.of(values)

