"""
Leak position from a correlation delay, error scoring and delay calibration.

Position formula, with L the sensor spacing and c the wave speed::

    d_l = (L - c * dt) / 2

dt is the peak lag of correlate(right, left), so d_l is measured from the
right sensor (sensor 1). ``LocalizationResult.from_left_m`` gives the same
position measured from the left sensor.

Calibration subtracts the no-leak baseline lag and a buffer time::

    dt = t_measured - t_noLeak - t_buffer
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import AnalysisConfig
from .errors import (
    InvalidEpsilonError,
    InvalidGeometryError,
    MissingBaselineError,
    SchemaError,
    ZeroActualError,
)
from .hydraulics import FlowMeasurement, PipeSpec, wave_speed
from .interference import InterferenceProfile, filter_series
from .json_compat import dumps as json_dumps, loads as json_loads
from .models import CalibrationDocument, CalibrationEntry, InterferenceProfileRef, validate_document
from .signal_core import Axis, RecordingPair, Scenario, TriAxialSeries
from .utils import run_ordered
from .xcorr import DelayEstimate, classify, cross_correlate, find_peak

logger = logging.getLogger(__name__)

KEY_DECIMALS = 6


@dataclass(frozen=True)
class LocalizationResult:
    """One axis worth of localisation with the inputs that produced it"""
    d_l_m: float
    spacing_L_m: float
    wave_speed_mps: float
    delta_t_s: float
    axis: Optional[Axis] = None
    error_percent: Optional[float] = None
    t_measured_s: Optional[float] = None
    t_noLeak_s: float = 0.0
    t_buffer_s: float = 0.0
    peak_value: Optional[float] = None
    classification: Optional[Scenario] = None

    @property
    def from_left_m(self) -> float:
        return self.spacing_L_m - self.d_l_m

    @property
    def out_of_range(self) -> bool:
        return not 0.0 <= self.d_l_m <= self.spacing_L_m

    def to_dict(self) -> Dict[str, Any]:
        return {
            "axis": self.axis.value if self.axis else None,
            "d_l_m": self.d_l_m,
            "from_left_m": self.from_left_m,
            "spacing_L_m": self.spacing_L_m,
            "wave_speed_mps": self.wave_speed_mps,
            "delta_t_s": self.delta_t_s,
            "t_measured_s": self.t_measured_s,
            "t_noLeak_s": self.t_noLeak_s,
            "t_buffer_s": self.t_buffer_s,
            "peak_value": self.peak_value,
            "classification": self.classification.value if self.classification else None,
            "error_percent": self.error_percent,
            "out_of_range": self.out_of_range,
        }


@dataclass(frozen=True)
class CalibrationProfile:
    t_noLeak_s: float = 0.0
    t_buffer_s: float = 0.0
    n_baselines: int = 0
    n_residuals: int = 0

    def __post_init__(self):
        for name in ("t_noLeak_s", "t_buffer_s"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")


@dataclass(frozen=True)
class IdealDelayBounds:
    """Distances and delays that keep a localisation within epsilon of the truth"""
    d_actual_per_side_m: float
    epsilon: float
    wave_speed_mps: float
    d_min_m: float
    d_max_m: float
    dt_min_s: float
    dt_max_s: float
    t_noLeak_s: Optional[float] = None
    t_actual_min_s: Optional[float] = None
    t_actual_max_s: Optional[float] = None

    def window(self) -> Tuple[float, float]:
        """(low, high) raw-lag window; falls back to the delay window without t_noLeak"""
        if self.t_actual_min_s is not None and self.t_actual_max_s is not None:
            pair = (self.t_actual_min_s, self.t_actual_max_s)
        else:
            pair = (self.dt_min_s, self.dt_max_s)
        return min(pair), max(pair)

    def to_dict(self) -> Dict[str, Any]:
        low, high = self.window()
        return {
            "d_actual_per_side_m": self.d_actual_per_side_m,
            "epsilon": self.epsilon,
            "wave_speed_mps": self.wave_speed_mps,
            "d_min_m": self.d_min_m,
            "d_max_m": self.d_max_m,
            "dt_min_s": self.dt_min_s,
            "dt_max_s": self.dt_max_s,
            "t_noLeak_s": self.t_noLeak_s,
            "t_actual_min_s": self.t_actual_min_s,
            "t_actual_max_s": self.t_actual_max_s,
            "window_s": [low, high],
        }


# ---------------------------------------------------------------------------
# Position arithmetic

def _check_geometry(spacing_L_m: float, c_mps: float) -> None:
    if not (math.isfinite(spacing_L_m) and spacing_L_m > 0):
        raise InvalidGeometryError(f"sensor spacing must be positive, got {spacing_L_m}")
    if not (math.isfinite(c_mps) and c_mps > 0):
        raise InvalidGeometryError(f"wave speed must be positive, got {c_mps}")


def localize(
    spacing_L_m: float,
    c_mps: float,
    delta_t_s: float,
    axis: Optional[Union[str, Axis]] = None,
) -> LocalizationResult:
    """
    d_l = (L - c * dt) / 2, measured from the right sensor.

    Positions outside [0, L] are returned as computed, never clamped; check
    ``out_of_range`` on the result.

    Raises:
        InvalidGeometryError: non-positive spacing or wave speed
    """
    _check_geometry(spacing_L_m, c_mps)
    if not math.isfinite(delta_t_s):
        raise InvalidGeometryError(f"delta_t_s must be finite, got {delta_t_s}")
    d_l = (spacing_L_m - c_mps * delta_t_s) / 2.0
    return LocalizationResult(
        d_l_m=d_l,
        spacing_L_m=spacing_L_m,
        wave_speed_mps=c_mps,
        delta_t_s=delta_t_s,
        axis=Axis.parse(axis) if axis is not None else None,
    )


def delay_for(d_l_m: float, spacing_L_m: float, c_mps: float) -> float:
    """Delay that localize() maps to d_l_m: (L - 2 d) / c"""
    _check_geometry(spacing_L_m, c_mps)
    return (spacing_L_m - 2.0 * d_l_m) / c_mps


def error_percent(d_actual_m: float, d_computed_m: float) -> float:
    """100 * (actual - computed) / actual"""
    if d_actual_m == 0:
        raise ZeroActualError("error percentage is undefined for a zero actual distance")
    return 100.0 * (d_actual_m - d_computed_m) / d_actual_m


def corrected_delay(t_measured_s: float, cal: CalibrationProfile) -> float:
    return t_measured_s - cal.t_noLeak_s - cal.t_buffer_s


def t_actual(delta_t_ideal_s: float, t_noLeak_s: float) -> float:
    """Raw lag a sensor pair must show to produce delta_t_ideal after baseline subtraction"""
    return delta_t_ideal_s + t_noLeak_s


def ideal_delay_bounds(
    d_actual_per_side_m: float,
    c_mps: float,
    epsilon: float,
    t_noLeak_s: Optional[float] = None,
) -> IdealDelayBounds:
    """
    Bounds on distance and delay for a localisation accurate to epsilon.

    With the leak midway between sensors (L = 2 d), the delays for
    d (1 -/+ epsilon) are +/- 2 d epsilon / c. Distances are not rounded
    before the delays are computed.

    Raises:
        InvalidEpsilonError: epsilon outside (0, 1)
        InvalidGeometryError: non-positive distance or wave speed
    """
    if not (math.isfinite(epsilon) and 0 < epsilon < 1):
        raise InvalidEpsilonError(f"epsilon must be in (0, 1), got {epsilon}")
    if not (math.isfinite(d_actual_per_side_m) and d_actual_per_side_m > 0):
        raise InvalidGeometryError(f"per-side distance must be positive, got {d_actual_per_side_m}")
    _check_geometry(2.0 * d_actual_per_side_m, c_mps)
    if t_noLeak_s is not None and not math.isfinite(t_noLeak_s):
        raise ValueError(f"t_noLeak_s must be finite, got {t_noLeak_s}")

    d = d_actual_per_side_m
    dt_min = 2.0 * d * epsilon / c_mps
    dt_max = -dt_min
    return IdealDelayBounds(
        d_actual_per_side_m=d,
        epsilon=epsilon,
        wave_speed_mps=c_mps,
        d_min_m=d * (1.0 - epsilon),
        d_max_m=d * (1.0 + epsilon),
        dt_min_s=dt_min,
        dt_max_s=dt_max,
        t_noLeak_s=t_noLeak_s,
        t_actual_min_s=t_actual(dt_min, t_noLeak_s) if t_noLeak_s is not None else None,
        t_actual_max_s=t_actual(dt_max, t_noLeak_s) if t_noLeak_s is not None else None,
    )


# ---------------------------------------------------------------------------
# Calibration table

CalibrationKey = Tuple[float, float, Axis]
ConditionKey = Tuple[float, float]


def condition_key(pressure_kgfcm2: float, spacing_L_m: float) -> ConditionKey:
    return (round(float(pressure_kgfcm2), KEY_DECIMALS), round(float(spacing_L_m), KEY_DECIMALS))


def calibration_key(pressure_kgfcm2: float, spacing_L_m: float, axis: Union[str, Axis]) -> CalibrationKey:
    return condition_key(pressure_kgfcm2, spacing_L_m) + (Axis.parse(axis),)


class CalibrationTable:
    """
    CalibrationProfile per (pressure, spacing, axis), plus the interference
    profile file to notch with per (pressure, spacing).

    Interference profile paths are stored as written; relative ones resolve
    against base_dir, which load() sets to the calibration file's directory.
    """

    def __init__(
        self,
        entries: Optional[Mapping[CalibrationKey, CalibrationProfile]] = None,
        base_dir: Optional[Union[str, Path]] = None,
    ):
        self._entries: Dict[CalibrationKey, CalibrationProfile] = {}
        self._interference: Dict[ConditionKey, str] = {}
        self.base_dir = Path(base_dir) if base_dir is not None else None
        for (pressure, spacing, axis), profile in (entries or {}).items():
            self.set(pressure, spacing, axis, profile)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Tuple[CalibrationKey, CalibrationProfile]]:
        for key in sorted(self._entries, key=lambda k: (k[0], k[1], k[2].index)):
            yield key, self._entries[key]

    def __contains__(self, key) -> bool:
        return calibration_key(*key) in self._entries

    def set(self, pressure_kgfcm2: float, spacing_L_m: float, axis: Union[str, Axis], profile: CalibrationProfile) -> None:
        self._entries[calibration_key(pressure_kgfcm2, spacing_L_m, axis)] = profile

    def get(self, pressure_kgfcm2: float, spacing_L_m: float, axis: Union[str, Axis]) -> Optional[CalibrationProfile]:
        return self._entries.get(calibration_key(pressure_kgfcm2, spacing_L_m, axis))

    def lookup(self, pressure_kgfcm2: float, spacing_L_m: float, axis: Union[str, Axis]) -> CalibrationProfile:
        profile = self.get(pressure_kgfcm2, spacing_L_m, axis)
        if profile is None:
            raise MissingBaselineError(
                f"no calibration for pressure={pressure_kgfcm2} spacing={spacing_L_m} axis={Axis.parse(axis).value}"
            )
        return profile

    def profiles_for(self, pressure_kgfcm2: float, spacing_L_m: float) -> Dict[Axis, CalibrationProfile]:
        return {axis: self.lookup(pressure_kgfcm2, spacing_L_m, axis) for axis in Axis}

    def set_interference_profile(self, pressure_kgfcm2: float, spacing_L_m: float, path: Union[str, Path]) -> None:
        self._interference[condition_key(pressure_kgfcm2, spacing_L_m)] = str(path)

    def interference_profile_path(self, pressure_kgfcm2: float, spacing_L_m: float) -> Optional[Path]:
        """Resolved interference profile file for a condition, or None"""
        name = self._interference.get(condition_key(pressure_kgfcm2, spacing_L_m))
        if name is None:
            return None
        path = Path(name)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path

    def interference_profile_paths(self) -> List[Path]:
        return [self.interference_profile_path(p, s) for p, s in sorted(self._interference)]

    def to_dict(self) -> Dict[str, Any]:
        entries = []
        for (pressure, spacing, axis), profile in self:
            entries.append({
                "pressure_kgfcm2": pressure,
                "spacing_L_m": spacing,
                "axis": axis.value,
                "t_noLeak_s": profile.t_noLeak_s,
                "t_buffer_s": profile.t_buffer_s,
                "n_baselines": profile.n_baselines,
                "n_residuals": profile.n_residuals,
            })
        interference = [
            {"pressure_kgfcm2": pressure, "spacing_L_m": spacing, "path": self._interference[(pressure, spacing)]}
            for pressure, spacing in sorted(self._interference)
        ]
        return {"entries": entries, "interference_profiles": interference}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: str = "calibration",
                  base_dir: Optional[Union[str, Path]] = None) -> "CalibrationTable":
        doc = validate_document(CalibrationDocument, data, source=source)
        table = cls(base_dir=base_dir)
        for i, raw in enumerate(getattr(doc, "interference_profiles", None) or []):
            ref = validate_document(InterferenceProfileRef, raw, source=f"{source} interference profile {i}")
            table.set_interference_profile(ref.pressure_kgfcm2, ref.spacing_L_m, ref.path)
        for i, raw in enumerate(doc.entries):
            entry = validate_document(CalibrationEntry, raw, source=f"{source} entry {i}")
            try:
                axis = Axis.parse(entry.axis)
            except ValueError as e:
                raise SchemaError(f"{source} entry {i}: {e}") from e
            table.set(entry.pressure_kgfcm2, entry.spacing_L_m, axis, CalibrationProfile(
                t_noLeak_s=entry.t_noLeak_s,
                t_buffer_s=entry.t_buffer_s,
                n_baselines=entry.n_baselines or 0,
                n_residuals=entry.n_residuals or 0,
            ))
        return table

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json_dumps(self.to_dict(), indent=True, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CalibrationTable":
        path = Path(path)
        return cls.from_dict(json_loads(path.read_text(encoding="utf-8")), source=str(path), base_dir=path.parent)


# ---------------------------------------------------------------------------
# Pair pipeline

def _prepare(pair: RecordingPair, config: AnalysisConfig,
             profile: Optional[InterferenceProfile]) -> Tuple[TriAxialSeries, TriAxialSeries]:
    right, left = pair.right.series, pair.left.series
    if profile is not None:
        right = filter_series(right, profile, config.notch_bandwidth_hz)
        left = filter_series(left, profile, config.notch_bandwidth_hz)
    return right, left


def _measure(right: TriAxialSeries, left: TriAxialSeries, axis: Axis, config: AnalysisConfig) -> DelayEstimate:
    corr = cross_correlate(
        right.axis(axis), left.axis(axis), right.sample_rate_hz,
        normalized=config.normalized, axis=axis,
    )
    return find_peak(corr, interpolate=config.interpolate)


def measured_delays(
    pair: RecordingPair,
    config: Optional[AnalysisConfig] = None,
    profile: Optional[InterferenceProfile] = None,
    axes: Iterable[Union[str, Axis]] = tuple(Axis),
) -> Dict[Axis, DelayEstimate]:
    """
    Filter (when a profile is given), correlate right against left and read
    the peak on each axis. peak_lag_s includes the pair's sub-sample start
    offset so it is a physical arrival-time difference, and the
    classification is made on that adjusted lag.
    """
    config = config or AnalysisConfig()
    axes = [Axis.parse(a) for a in axes]
    right, left = _prepare(pair, config, profile)

    def _one(axis: Axis) -> DelayEstimate:
        estimate = _measure(right, left, axis, config)
        if pair.start_offset_s:
            estimate = replace(estimate, peak_lag_s=estimate.peak_lag_s + pair.start_offset_s)
        return classify(estimate, config.threshold_s)

    return dict(zip(axes, run_ordered(_one, axes, max_concurrent=config.max_concurrent)))


def baseline_lag(
    pair: RecordingPair,
    axis: Union[str, Axis],
    config: Optional[AnalysisConfig] = None,
) -> float:
    """
    t_noLeak for one axis: the peak lag of the mean-removed, unfiltered pair.

    The shared interference is what carries the clock skew in a no-leak
    recording, so it is not notched out here.
    """
    estimates = measured_delays(pair, config, profile=None, axes=(axis,))
    return estimates[Axis.parse(axis)].peak_lag_s


def _actual_from_reference(pair: RecordingPair) -> Optional[float]:
    geometry = pair.geometry
    if geometry.true_leak_from_left_m is not None:
        return geometry.true_leak_from_right_m
    return geometry.per_side_m


def localize_pair(
    pair: RecordingPair,
    cal: Union[CalibrationProfile, Mapping[Axis, CalibrationProfile]],
    flow: FlowMeasurement,
    spec: PipeSpec,
    config: Optional[AnalysisConfig] = None,
    profile: Optional[InterferenceProfile] = None,
    axes: Iterable[Union[str, Axis]] = tuple(Axis),
) -> List[LocalizationResult]:
    """
    Filter, correlate, read the peak, subtract calibration and localise, per axis.

    Results come back in axis order. error_percent is filled in when the
    pair's geometry carries a ground truth or an equidistant layout.
    """
    config = config or AnalysisConfig()
    axes = [Axis.parse(a) for a in axes]
    c = wave_speed(flow, spec)
    spacing = pair.geometry.spacing_L_m
    d_actual = _actual_from_reference(pair)
    estimates = measured_delays(pair, config, profile, axes)

    results = []
    for axis in axes:
        axis_cal = cal if isinstance(cal, CalibrationProfile) else cal[axis]
        estimate = estimates[axis]
        delta = corrected_delay(estimate.peak_lag_s, axis_cal)
        base = localize(spacing, c, delta, axis)
        err = error_percent(d_actual, base.d_l_m) if d_actual else None
        result = LocalizationResult(
            d_l_m=base.d_l_m,
            spacing_L_m=spacing,
            wave_speed_mps=c,
            delta_t_s=delta,
            axis=axis,
            error_percent=err,
            t_measured_s=estimate.peak_lag_s,
            t_noLeak_s=axis_cal.t_noLeak_s,
            t_buffer_s=axis_cal.t_buffer_s,
            peak_value=estimate.peak_value,
            classification=estimate.classification,
        )
        if result.out_of_range:
            logger.warning(
                "leak position outside the sensor span axis=%s d_l_m=%.3f spacing_L_m=%.3f",
                axis.value, result.d_l_m, spacing,
            )
        results.append(result)
    return results


# ---------------------------------------------------------------------------
# Fitting calibration from data

def buffer_residual(t_measured_s: float, t_noLeak_s: float, delta_t_ideal_s: float) -> float:
    return t_measured_s - t_noLeak_s - delta_t_ideal_s


def fit_buffer(residuals: Sequence[float]) -> float:
    """t_buffer as the mean residual over known-leak recordings"""
    if len(residuals) == 0:
        raise ValueError("at least one residual is needed to fit a buffer time")
    return float(np.mean(residuals))


def _condition(pair: RecordingPair) -> ConditionKey:
    return condition_key(pair.pressure_kgfcm2, pair.geometry.spacing_L_m)


def build_calibration(
    no_leak_pairs: Sequence[RecordingPair],
    leak_pairs: Sequence[RecordingPair] = (),
    spec: Optional[PipeSpec] = None,
    config: Optional[AnalysisConfig] = None,
    profiles: Optional[Sequence[Optional[InterferenceProfile]]] = None,
) -> CalibrationTable:
    """
    Calibration table from no-leak pairs and, optionally, known-leak pairs.

    t_noLeak is the mean baseline lag of the no-leak pairs of a condition.
    For every leak pair with a ground-truth position, the residual
    t_measured - t_noLeak - dt_ideal is collected; t_buffer is their mean.
    profiles, when given, runs parallel to leak_pairs.

    Raises:
        MissingBaselineError: a leak pair's condition has no no-leak pair
    """
    config = config or AnalysisConfig()
    spec = spec or PipeSpec()
    profiles = list(profiles) if profiles is not None else [None] * len(leak_pairs)
    if len(profiles) != len(leak_pairs):
        raise ValueError("profiles must run parallel to leak_pairs")

    lags = run_ordered(lambda p: measured_delays(p, config), no_leak_pairs, config.max_concurrent)
    baselines: Dict[Tuple[float, float], Dict[Axis, List[float]]] = OrderedDict()
    for pair, estimates in zip(no_leak_pairs, lags):
        per_axis = baselines.setdefault(_condition(pair), {axis: [] for axis in Axis})
        for axis, estimate in estimates.items():
            per_axis[axis].append(estimate.peak_lag_s)

    residuals: Dict[Tuple[float, float], Dict[Axis, List[float]]] = {}
    for pair, profile in zip(leak_pairs, profiles):
        condition = _condition(pair)
        if condition not in baselines:
            raise MissingBaselineError(
                f"leak pair at pressure={condition[0]} spacing={condition[1]} has no no-leak baseline"
            )
        truth = pair.geometry.true_leak_from_left_m
        if truth is None:
            logger.warning("skipping leak pair without ground truth pressure=%s spacing=%s", *condition)
            continue
        c = wave_speed(FlowMeasurement(pair.flow_lpm, pair.pressure_kgfcm2), spec)
        dt_ideal = delay_for(pair.geometry.spacing_L_m - truth, pair.geometry.spacing_L_m, c)
        per_axis = residuals.setdefault(condition, {axis: [] for axis in Axis})
        for axis, estimate in measured_delays(pair, config, profile).items():
            t_noLeak = float(np.mean(baselines[condition][axis]))
            per_axis[axis].append(buffer_residual(estimate.peak_lag_s, t_noLeak, dt_ideal))

    table = CalibrationTable()
    for (pressure, spacing), per_axis in baselines.items():
        for axis in Axis:
            fitted = residuals.get((pressure, spacing), {}).get(axis, [])
            profile = CalibrationProfile(
                t_noLeak_s=float(np.mean(per_axis[axis])),
                t_buffer_s=fit_buffer(fitted) if fitted else config.t_buffer_s,
                n_baselines=len(per_axis[axis]),
                n_residuals=len(fitted),
            )
            table.set(pressure, spacing, axis, profile)
            logger.debug(
                "calibrated pressure=%s spacing=%s axis=%s t_noLeak_s=%.4f t_buffer_s=%.4f",
                pressure, spacing, axis.value, profile.t_noLeak_s, profile.t_buffer_s,
            )
    return table
