"""
Tests for leak position arithmetic, ideal-delay bounds and calibration.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from leakloc.errors import (
    InvalidEpsilonError,
    InvalidGeometryError,
    MissingBaselineError,
    SchemaError,
    ZeroActualError,
)
from leakloc.hydraulics import FlowMeasurement, PipeSpec, wave_speed
from leakloc.localizer import (
    CalibrationProfile,
    CalibrationTable,
    baseline_lag,
    build_calibration,
    corrected_delay,
    delay_for,
    error_percent,
    fit_buffer,
    ideal_delay_bounds,
    localize,
    localize_pair,
    measured_delays,
    t_actual,
)
from leakloc.signal_core import Axis, Scenario

from conftest import make_pair, make_series

FS = 100.0
C = 0.352


def delayed_pair(rng, k, spacing=2.0, scenario="NoLeak", truth=None, n=4096):
    """Left sensor sees the right sensor's signal k samples later"""
    x = rng.standard_normal((n, 3))
    right = make_series(x, FS)
    left = make_series(np.roll(x, k, axis=0), FS)
    return make_pair(left, right, spacing=spacing, scenario=scenario, truth=truth)


class TestLocalize:
    """d_l = (L - c dt) / 2"""

    def test_zero_delay_is_midpoint(self):
        result = localize(2.0, C, 0.0)
        assert result.d_l_m == pytest.approx(1.0)
        assert result.from_left_m == pytest.approx(1.0)

    def test_formula(self):
        result = localize(3.0, 0.278, 1.5, axis="y")
        assert result.d_l_m == pytest.approx((3.0 - 0.278 * 1.5) / 2)
        assert result.axis is Axis.Y
        assert result.from_left_m == pytest.approx(3.0 - result.d_l_m)

    @pytest.mark.parametrize("dt", [0.0, 0.37, -2.5, 11.0])
    def test_antisymmetric_in_delay(self, dt):
        assert localize(2.0, C, dt).d_l_m + localize(2.0, C, -dt).d_l_m == pytest.approx(2.0)

    @pytest.mark.parametrize("d_l", [0.0, 0.3, 1.0, 1.9, 2.0])
    def test_delay_for_inverts_localize(self, d_l):
        assert localize(2.0, C, delay_for(d_l, 2.0, C)).d_l_m == pytest.approx(d_l)

    def test_out_of_range_is_not_clamped(self):
        result = localize(1.0, 0.4337, 14.49)
        assert result.d_l_m < 0
        assert result.out_of_range
        assert not localize(1.0, 0.4337, 0.5).out_of_range

    @pytest.mark.parametrize("spacing, c, dt", [
        (0.0, C, 0.0),
        (-1.0, C, 0.0),
        (2.0, 0.0, 0.0),
        (2.0, C, float("nan")),
    ])
    def test_invalid_geometry(self, spacing, c, dt):
        with pytest.raises(InvalidGeometryError):
            localize(spacing, c, dt)

    def test_result_dict(self):
        data = localize(2.0, C, 0.1, axis="x").to_dict()
        assert data["axis"] == "x"
        assert data["out_of_range"] is False
        assert data["from_left_m"] == pytest.approx(2.0 - data["d_l_m"])


class TestErrorPercent:
    @pytest.mark.parametrize("actual, computed, expected", [
        (0.5, -2.67, 634.0),
        (0.5, 0.43, 14.0),
        (0.5, -11.47, 2394.0),
        (1.0, 1.0, 0.0),
    ])
    def test_published_values(self, actual, computed, expected):
        assert error_percent(actual, computed) == pytest.approx(expected, abs=1.0)

    def test_zero_actual(self):
        with pytest.raises(ZeroActualError):
            error_percent(0.0, 0.1)


class TestIdealBounds:
    """Distances and delays within epsilon of a midpoint leak"""

    def test_delays_are_symmetric(self):
        bounds = ideal_delay_bounds(1.0, C, 0.029)
        assert bounds.dt_min_s == pytest.approx(2 * 1.0 * 0.029 / C)
        assert bounds.dt_max_s == -bounds.dt_min_s
        assert bounds.d_min_m == pytest.approx(0.971)
        assert bounds.d_max_m == pytest.approx(1.029)

    def test_bound_delays_localise_to_bound_distances(self):
        bounds = ideal_delay_bounds(1.5, 0.278, 0.029)
        assert localize(3.0, 0.278, bounds.dt_min_s).d_l_m == pytest.approx(bounds.d_min_m)
        assert localize(3.0, 0.278, bounds.dt_max_s).d_l_m == pytest.approx(bounds.d_max_m)

    def test_t_actual_adds_baseline(self):
        bounds = ideal_delay_bounds(0.5, C, 0.029, t_noLeak_s=-0.14)
        assert bounds.t_actual_min_s == pytest.approx(bounds.dt_min_s - 0.14)
        assert bounds.t_actual_max_s == pytest.approx(bounds.dt_max_s - 0.14)
        assert t_actual(0.2, -0.1) == pytest.approx(0.1)
        assert ideal_delay_bounds(0.5, C, 0.029).t_actual_min_s is None

    def test_window_is_ordered_and_shifted_by_baseline(self):
        plain = ideal_delay_bounds(1.0, C, 0.029)
        assert plain.window() == (plain.dt_max_s, plain.dt_min_s)
        shifted = ideal_delay_bounds(1.0, C, 0.029, t_noLeak_s=-0.26)
        low, high = shifted.window()
        assert low == pytest.approx(plain.dt_max_s - 0.26)
        assert high == pytest.approx(plain.dt_min_s - 0.26)
        assert shifted.to_dict()["window_s"] == [low, high]

    @pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.1, float("nan")])
    def test_invalid_epsilon(self, epsilon):
        with pytest.raises(InvalidEpsilonError):
            ideal_delay_bounds(1.0, C, epsilon)

    def test_invalid_distance(self):
        with pytest.raises(InvalidGeometryError):
            ideal_delay_bounds(0.0, C, 0.029)


class TestCalibrationTable:
    def test_corrected_delay(self):
        cal = CalibrationProfile(t_noLeak_s=-0.26, t_buffer_s=0.05)
        assert corrected_delay(1.0, cal) == pytest.approx(1.21)
        assert corrected_delay(1.0, CalibrationProfile()) == 1.0

    def test_profile_must_be_finite(self):
        with pytest.raises(ValueError):
            CalibrationProfile(t_noLeak_s=float("inf"))

    def test_set_get_lookup(self):
        table = CalibrationTable()
        table.set(1.0, 2.0, "x", CalibrationProfile(-0.26))
        assert table.get(1.0, 2.0, Axis.X) == CalibrationProfile(-0.26)
        assert table.get(1.0, 2.0, "y") is None
        assert (1.0, 2.0, "x") in table
        with pytest.raises(MissingBaselineError):
            table.lookup(1.4, 2.0, "x")

    def test_keys_tolerate_float_noise(self):
        table = CalibrationTable()
        table.set(0.1 + 0.2, 1.0, "z", CalibrationProfile(0.1))
        assert table.get(0.3, 1.0, "z") is not None

    def test_profiles_for_needs_every_axis(self):
        table = CalibrationTable()
        for axis in ("x", "y"):
            table.set(1.0, 2.0, axis, CalibrationProfile())
        with pytest.raises(MissingBaselineError):
            table.profiles_for(1.0, 2.0)

    def test_save_and_load(self, tmp_path):
        table = CalibrationTable()
        table.set(1.4, 3.0, "z", CalibrationProfile(-0.08, 0.01, 2, 1))
        table.set(0.6, 1.0, "x", CalibrationProfile(-0.14, 0.0, 1, 0))
        path = table.save(tmp_path / "calibration.json")
        back = CalibrationTable.load(path)
        assert len(back) == 2
        assert back.get(1.4, 3.0, "z") == CalibrationProfile(-0.08, 0.01, 2, 1)
        # iteration is sorted by pressure, spacing, axis
        assert [key[0] for key, _ in back] == [0.6, 1.4]

    def test_bad_document(self):
        with pytest.raises(SchemaError):
            CalibrationTable.from_dict({"entries": [{
                "pressure_kgfcm2": 1.0, "spacing_L_m": 2.0, "axis": "w", "t_noLeak_s": 0.0, "t_buffer_s": 0.0,
            }]})
        with pytest.raises(SchemaError):
            CalibrationTable.from_dict({"rows": []})

    def test_interference_profiles_resolve_next_to_the_file(self, tmp_path):
        table = CalibrationTable()
        table.set(1.0, 2.0, "x", CalibrationProfile(-0.14))
        table.set_interference_profile(1.0, 2.0, "profile_p1_d1_noleak.json")
        table.set_interference_profile(1.4, 3.0, tmp_path / "elsewhere" / "profile.json")
        assert table.interference_profile_path(1.0, 2.0) == Path("profile_p1_d1_noleak.json")

        cal_dir = tmp_path / "cal"
        cal_dir.mkdir()
        back = CalibrationTable.load(table.save(cal_dir / "calibration.json"))
        assert back.interference_profile_path(1.0, 2.0) == cal_dir / "profile_p1_d1_noleak.json"
        assert back.interference_profile_path(1.4, 3.0) == tmp_path / "elsewhere" / "profile.json"
        assert back.interference_profile_path(0.6, 1.0) is None
        assert back.interference_profile_paths() == [
            cal_dir / "profile_p1_d1_noleak.json", tmp_path / "elsewhere" / "profile.json",
        ]

    def test_bad_interference_reference(self):
        with pytest.raises(SchemaError):
            CalibrationTable.from_dict({"entries": [], "interference_profiles": [{"pressure_kgfcm2": 1.0}]})


class TestPairPipeline:
    """Correlate, calibrate and localise synthetic pairs"""

    def test_baseline_lag_reads_skew(self, rng):
        pair = delayed_pair(rng, -26)
        assert baseline_lag(pair, "y") == pytest.approx(-0.26)

    def test_measured_delays_include_start_offset(self, rng):
        x = rng.standard_normal((2048, 3))
        right = make_series(x, FS)
        left = make_series(np.roll(x, 40, axis=0), FS, start_time_s=0.003)
        pair = make_pair(left, right)
        assert pair.start_offset_s == pytest.approx(0.003)
        estimates = measured_delays(pair, axes=("x",))
        assert list(estimates) == [Axis.X]
        assert estimates[Axis.X].peak_lag_s == pytest.approx(0.403)

    def test_classification_uses_offset_adjusted_lag(self, rng):
        # 50 samples is exactly the 0.5 s threshold; the 4 ms start offset tips it over
        x = rng.standard_normal((2048, 3))
        pair = make_pair(make_series(np.roll(x, 50, axis=0), FS, start_time_s=0.004), make_series(x, FS))
        estimate = measured_delays(pair, axes=("y",))[Axis.Y]
        assert estimate.peak_lag_s == pytest.approx(0.504)
        assert estimate.classification is Scenario.LEAK

    def test_localize_pair_recovers_leak(self, rng):
        truth = 0.5
        c = wave_speed(FlowMeasurement(18.5), PipeSpec())
        k = int(round(delay_for(2.0 - truth, 2.0, c) * FS))
        pair = delayed_pair(rng, k, scenario="Leak", truth=truth)
        results = localize_pair(pair, CalibrationProfile(), FlowMeasurement(18.5, 1.0), PipeSpec())
        assert [r.axis for r in results] == [Axis.X, Axis.Y, Axis.Z]
        for result in results:
            assert result.classification is Scenario.LEAK
            assert abs(result.from_left_m - truth) <= c / (2 * FS)
            assert abs(result.error_percent) < 1.0

    def test_localize_pair_applies_per_axis_calibration(self, rng):
        pair = delayed_pair(rng, 30)
        cal = {axis: CalibrationProfile(t_noLeak_s=0.3) for axis in Axis}
        results = localize_pair(pair, cal, FlowMeasurement(18.5), PipeSpec(), axes=("z",))
        assert len(results) == 1
        assert results[0].delta_t_s == pytest.approx(0.0, abs=1e-12)
        assert results[0].d_l_m == pytest.approx(1.0)
        assert results[0].t_measured_s == pytest.approx(0.3)
        assert results[0].classification is Scenario.NO_LEAK


class TestBuildCalibration:
    def test_fit_buffer(self):
        assert fit_buffer([0.04, 0.06]) == pytest.approx(0.05)
        with pytest.raises(ValueError):
            fit_buffer([])

    def test_baselines_only(self, rng):
        table = build_calibration([delayed_pair(rng, -14), delayed_pair(rng, -10)])
        profile = table.lookup(1.0, 2.0, "x")
        assert profile.t_noLeak_s == pytest.approx(-0.12)
        assert profile.t_buffer_s == 0.0
        assert profile.n_baselines == 2
        assert len(table) == 3

    def test_buffer_from_known_leak(self, rng):
        truth = 0.5
        c = wave_speed(FlowMeasurement(18.5, 1.0), PipeSpec())
        dt_ideal = delay_for(2.0 - truth, 2.0, c)
        k = int(round((dt_ideal - 0.26 + 0.05) * FS))
        table = build_calibration(
            [delayed_pair(rng, -26)],
            [delayed_pair(rng, k, scenario="Leak", truth=truth)],
        )
        profile = table.lookup(1.0, 2.0, "z")
        assert profile.t_noLeak_s == pytest.approx(-0.26)
        assert profile.t_buffer_s == pytest.approx(k / FS + 0.26 - dt_ideal)
        assert profile.t_buffer_s == pytest.approx(0.05, abs=1 / FS)
        assert profile.n_residuals == 1

    def test_leak_without_baseline(self, rng):
        with pytest.raises(MissingBaselineError):
            build_calibration(
                [delayed_pair(rng, 0, spacing=3.0)],
                [delayed_pair(rng, 10, scenario="Leak", truth=1.0)],
            )

    def test_profiles_must_be_parallel(self, rng):
        with pytest.raises(ValueError):
            build_calibration([delayed_pair(rng, 0)], [], profiles=[None])
