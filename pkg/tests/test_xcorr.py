"""
Tests for the cross-correlation engine: FFT and direct paths, peak picking,
classification and plot-data export.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from leakloc.errors import DegenerateInputError, LengthMismatchError, MalformedRowError, RateMismatchError
from leakloc.signal_core import Axis, Scenario
from leakloc.xcorr import (
    CorrelationFunction,
    DelayEstimate,
    classify,
    correlate_axes,
    cross_correlate,
    estimate_delay,
    export_correlation,
    find_peak,
    parse_correlation,
    read_correlation,
)

from conftest import make_series

FS = 100.0


def shifted_pair(rng, n, k):
    """s2 is s1 delayed by k samples (circularly, so every lag sees full overlap)"""
    s1 = rng.standard_normal(n)
    return s1, np.roll(s1, k)


class TestCrossCorrelate:
    """Values, lags and normalisation"""

    def test_hand_computed_values(self):
        corr = cross_correlate([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], FS, normalized=False)
        # mean-removed inputs are [-1, 0, 1]
        assert np.allclose(corr.values, [-1.0, 0.0, 2.0, 0.0, -1.0])
        assert np.allclose(corr.lags_s, np.arange(-2, 3) / FS)

    def test_identical_inputs_peak_at_zero_with_unit_value(self, rng):
        x = rng.standard_normal(500)
        estimate = find_peak(cross_correlate(x, x, FS))
        assert estimate.lag_index == 0
        assert estimate.peak_value == pytest.approx(1.0)

    def test_positive_lag_means_second_signal_is_later(self):
        x = np.zeros(64)
        x[10] = 1.0
        y = np.zeros(64)
        y[13] = 1.0
        estimate = find_peak(cross_correlate(x, y, FS))
        assert estimate.lag_index == 3
        assert estimate.peak_lag_s == pytest.approx(0.03)

    def test_swap_negates_peak(self, rng):
        s1, s2 = shifted_pair(rng, 1024, 17)
        forward = find_peak(cross_correlate(s1, s2, FS))
        backward = find_peak(cross_correlate(s2, s1, FS))
        assert backward.peak_lag_s == -forward.peak_lag_s

    @pytest.mark.parametrize("method", ["fft", "direct"])
    @pytest.mark.parametrize("normalized", [True, False])
    def test_swap_reverses_whole_function_exactly(self, method, normalized):
        rng = np.random.default_rng(77)
        for _ in range(20):
            n = int(rng.integers(2, 600))
            x, y = rng.standard_normal(n), rng.standard_normal(n) + 0.3
            forward = cross_correlate(x, y, FS, normalized=normalized, method=method)
            backward = cross_correlate(y, x, FS, normalized=normalized, method=method)
            assert np.array_equal(backward.values, forward.values[::-1])
            assert np.array_equal(backward.lags_s, -forward.lags_s[::-1])

    def test_normalisation_bound(self, rng):
        corr = cross_correlate(rng.standard_normal(300) + 4.0, rng.standard_normal(300), FS)
        assert np.all(np.abs(corr.values) <= 1.0 + 1e-12)

    def test_unnormalised_scales_with_energy(self, rng):
        x, y = rng.standard_normal(200), rng.standard_normal(200)
        base = cross_correlate(x, y, FS, normalized=False).values
        scaled = cross_correlate(3.0 * x, 2.0 * y, FS, normalized=False).values
        assert np.allclose(scaled, 6.0 * base)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            cross_correlate(np.zeros(10), np.zeros(11), FS)
        with pytest.raises(LengthMismatchError):
            cross_correlate([1.0], [1.0], FS)

    def test_degenerate_input(self):
        with pytest.raises(DegenerateInputError):
            cross_correlate(np.full(32, 0.98), np.arange(32.0), FS)
        # unnormalised correlation of a flat signal is simply zero
        corr = cross_correlate(np.full(32, 0.98), np.arange(32.0), FS, normalized=False)
        assert np.allclose(corr.values, 0.0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            cross_correlate(np.zeros(4), np.zeros(4), FS, method="wavelet")

    def test_lengths_and_indices(self):
        corr = cross_correlate(np.arange(7.0), np.arange(7.0) ** 2, FS)
        assert len(corr) == 13
        assert corr.input_length == 7
        assert corr.lag_indices[0] == -6
        assert corr.value_at(0) == pytest.approx(corr.values[6])


class TestFftMatchesDirect:
    """The FFT path agrees with the direct sum at every lag"""

    @pytest.mark.parametrize("n", [16, 257, 1024, 4096])
    def test_fifty_seeded_pairs(self, n):
        for seed in range(50):
            rng = np.random.default_rng(seed * 7919 + n)
            x, y = rng.standard_normal(n), rng.standard_normal(n)
            fast = cross_correlate(x, y, FS, normalized=False, method="fft").values
            slow = cross_correlate(x, y, FS, normalized=False, method="direct").values
            scale = np.max(np.abs(slow))
            assert np.max(np.abs(fast - slow)) <= 1e-9 * scale


class TestShiftRecovery:
    """Integer shifts come back exactly"""

    def test_hundred_seeded_trials(self):
        rng = np.random.default_rng(2024)
        failures = []
        for _ in range(100):
            k = int(rng.integers(-200, 201))
            s1, s2 = shifted_pair(rng, 4096, k)
            estimate = find_peak(cross_correlate(s1, s2, FS))
            if estimate.peak_lag_s != k / FS:
                failures.append(k)
        assert failures == []

    def test_interpolation_finds_sub_sample_delay(self):
        fs = 100.0
        t = np.arange(2048) / fs
        x = np.exp(-((t - 10.0) ** 2) / 0.02)
        y = np.exp(-((t - 10.034) ** 2) / 0.02)
        corr = cross_correlate(x, y, fs)
        assert find_peak(corr).peak_lag_s == pytest.approx(0.03)
        assert find_peak(corr, interpolate=True).peak_lag_s == pytest.approx(0.034, abs=0.002)


class TestFindPeak:
    def test_ties_go_to_smallest_lag_then_negative(self):
        corr = CorrelationFunction(np.arange(-2, 3) / FS, [1.0, 0.0, 0.5, 0.0, 1.0], True, FS)
        assert find_peak(corr).lag_index == -2
        corr = CorrelationFunction(np.arange(-2, 3) / FS, [0.0, 1.0, 1.0, 1.0, 0.0], True, FS)
        assert find_peak(corr).lag_index == 0

    def test_maximum_not_magnitude(self):
        corr = CorrelationFunction(np.arange(-1, 2) / FS, [-0.9, 0.2, 0.4], True, FS)
        assert find_peak(corr).lag_index == 1

    def test_even_length_rejected(self):
        with pytest.raises(ValueError):
            CorrelationFunction(np.zeros(4), np.zeros(4), True, FS)


class TestClassify:
    @pytest.mark.parametrize("lag, expected", [
        (0.0, Scenario.NO_LEAK),
        (-0.26, Scenario.NO_LEAK),
        (0.5, Scenario.NO_LEAK),
        (-0.51, Scenario.LEAK),
        (14.49, Scenario.LEAK),
    ])
    def test_threshold_is_inclusive(self, lag, expected):
        estimate = DelayEstimate(peak_lag_s=lag, peak_value=0.5, lag_index=0)
        assert classify(estimate, 0.5).classification is expected

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            classify(DelayEstimate(0.0, 1.0, 0), 0.0)

    def test_estimate_delay(self, rng):
        s1, s2 = shifted_pair(rng, 2048, 120)
        estimate = estimate_delay(cross_correlate(s1, s2, FS), threshold_s=0.5)
        assert estimate.peak_lag_s == pytest.approx(1.2)
        assert estimate.classification is Scenario.LEAK


class TestCorrelateAxes:
    def test_keyed_by_axis_and_concurrency_safe(self, rng):
        n = 1024
        base = rng.standard_normal((n, 3))
        first = make_series(base)
        second = make_series(np.column_stack([np.roll(base[:, i], k) for i, k in enumerate((5, -7, 0))]))
        serial = correlate_axes(first, second, max_concurrent=1)
        threaded = correlate_axes(first, second, max_concurrent=3)
        assert list(serial) == [Axis.X, Axis.Y, Axis.Z]
        assert [find_peak(c).lag_index for c in serial.values()] == [5, -7, 0]
        for axis in Axis:
            assert np.array_equal(serial[axis].values, threaded[axis].values)

    def test_rate_mismatch(self, rng):
        base = rng.standard_normal((256, 3))
        with pytest.raises(RateMismatchError):
            correlate_axes(make_series(base, 100.0), make_series(base, 50.0))


class TestPlotData:
    def test_export_and_read(self, tmp_path, rng):
        corr = cross_correlate(rng.standard_normal(50), rng.standard_normal(50), FS, axis="z")
        path = export_correlation(corr, tmp_path / "xcorr_z.csv")
        text = path.read_text()
        assert text.startswith("lag_s,value\n")
        assert "\r" not in text
        back = read_correlation(path, axis="z")
        assert back.sample_rate_hz == FS
        assert np.array_equal(back.values, corr.values)
        assert np.array_equal(back.lags_s, corr.lags_s)

    def test_bad_header(self):
        with pytest.raises(MalformedRowError):
            parse_correlation("lag,v\n0,1\n")
