"""
Recording types, CSV ingestion and time alignment of paired sensors.

Sensor CSV format::

    t,ax,ay,az
    0.0,0.012,-0.98,0.031
    0.01,0.011,-0.97,0.030

``t`` is in seconds and strictly increasing, the axes are in g. Rows must be
uniformly spaced; the sample rate is inferred from the first two timestamps.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, TextIO, Tuple, Union

import numpy as np

from .errors import (
    EmptyFileError,
    MalformedRowError,
    NoOverlapError,
    NonUniformSamplingError,
    PairMismatchError,
    RateMismatchError,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ("t", "ax", "ay", "az")
RATE_SIGNIFICANT_DIGITS = 9
UNIFORMITY_TOLERANCE = 0.5  # sample periods
RESIDUAL_SNAP = 1e-6  # sample periods


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        return "xyz".index(self.value)

    @classmethod
    def parse(cls, value: Union[str, "Axis"]) -> "Axis":
        if isinstance(value, Axis):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown axis {value!r}; expected x, y or z") from None


class Scenario(str, Enum):
    NO_LEAK = "NoLeak"
    LEAK = "Leak"

    @classmethod
    def parse(cls, value: Union[str, "Scenario"]) -> "Scenario":
        if isinstance(value, Scenario):
            return value
        key = str(value).replace("-", "").replace("_", "").replace(" ", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown scenario {value!r}; expected Leak or NoLeak")


class Side(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"

    @classmethod
    def parse(cls, value: Union[str, "Side"]) -> "Side":
        if isinstance(value, Side):
            return value
        for member in cls:
            if member.value.lower() == str(value).strip().lower():
                return member
        raise ValueError(f"unknown side {value!r}; expected Left or Right")


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TriAxialSeries:
    """Uniformly sampled three-axis acceleration (g); sample i is at start + i/fs"""
    sample_rate_hz: float
    start_time_s: float
    samples: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise ValueError(f"sample_rate_hz must be positive and finite, got {self.sample_rate_hz}")
        if not math.isfinite(self.start_time_s):
            raise ValueError(f"start_time_s must be finite, got {self.start_time_s}")
        samples = _frozen_array(self.samples)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ValueError(f"samples must have shape (N, 3), got {samples.shape}")
        if samples.shape[0] == 0:
            raise ValueError("samples must not be empty")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TriAxialSeries):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.start_time_s == other.start_time_s
            and np.array_equal(self.samples, other.samples)
        )

    @property
    def period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    def axis(self, axis: Union[str, Axis]) -> np.ndarray:
        """Read-only view of one axis"""
        return self.samples[:, Axis.parse(axis).index]

    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(len(self)) / self.sample_rate_hz

    def slice(self, start: int, stop: int) -> "TriAxialSeries":
        """Samples [start, stop) with the start time moved accordingly"""
        if not 0 <= start < stop <= len(self):
            raise ValueError(f"invalid slice [{start}, {stop}) for length {len(self)}")
        if start == 0 and stop == len(self):
            return self
        return TriAxialSeries(
            sample_rate_hz=self.sample_rate_hz,
            start_time_s=self.start_time_s + start / self.sample_rate_hz,
            samples=self.samples[start:stop],
        )

    def with_samples(self, samples: np.ndarray) -> "TriAxialSeries":
        """Same timing, new sample values"""
        return TriAxialSeries(self.sample_rate_hz, self.start_time_s, samples)


@dataclass(frozen=True)
class RecordingMeta:
    """Labels attached to a recording when it is parsed"""
    sensor_id: str
    side: Side
    scenario: Scenario = Scenario.NO_LEAK
    pressure_kgfcm2: float = 0.0
    flow_lpm: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "side", Side.parse(self.side))
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        for name in ("pressure_kgfcm2", "flow_lpm"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class SensorRecording:
    sensor_id: str
    series: TriAxialSeries
    pressure_kgfcm2: float
    flow_lpm: float
    scenario: Scenario
    side: Side

    def __post_init__(self):
        # RecordingMeta performs the label validation
        meta = RecordingMeta(self.sensor_id, self.side, self.scenario, self.pressure_kgfcm2, self.flow_lpm)
        object.__setattr__(self, "side", meta.side)
        object.__setattr__(self, "scenario", meta.scenario)
        object.__setattr__(self, "pressure_kgfcm2", meta.pressure_kgfcm2)
        object.__setattr__(self, "flow_lpm", meta.flow_lpm)

    @property
    def meta(self) -> RecordingMeta:
        return RecordingMeta(self.sensor_id, self.side, self.scenario, self.pressure_kgfcm2, self.flow_lpm)

    @classmethod
    def from_meta(cls, series: TriAxialSeries, meta: RecordingMeta) -> "SensorRecording":
        return cls(
            sensor_id=meta.sensor_id,
            series=series,
            pressure_kgfcm2=meta.pressure_kgfcm2,
            flow_lpm=meta.flow_lpm,
            scenario=meta.scenario,
            side=meta.side,
        )

    def with_series(self, series: TriAxialSeries) -> "SensorRecording":
        return replace(self, series=series)


@dataclass(frozen=True)
class DeploymentGeometry:
    """Sensor spacing L plus optional equidistant layout and ground truth"""
    spacing_L_m: float
    per_side_m: Optional[float] = None
    true_leak_from_left_m: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.spacing_L_m) and self.spacing_L_m > 0):
            raise ValueError(f"spacing_L_m must be positive, got {self.spacing_L_m}")
        if self.per_side_m is not None:
            if not self.per_side_m > 0:
                raise ValueError(f"per_side_m must be positive, got {self.per_side_m}")
            if abs(self.spacing_L_m - 2.0 * self.per_side_m) > 1e-9:
                raise ValueError(
                    f"equidistant layout needs spacing_L_m = 2 x per_side_m "
                    f"({self.spacing_L_m} != 2 x {self.per_side_m})"
                )
        if self.true_leak_from_left_m is not None:
            if not 0 <= self.true_leak_from_left_m <= self.spacing_L_m:
                raise ValueError(
                    f"true_leak_from_left_m must lie in [0, {self.spacing_L_m}], "
                    f"got {self.true_leak_from_left_m}"
                )

    @classmethod
    def equidistant(cls, per_side_m: float, true_leak_from_left_m: Optional[float] = None) -> "DeploymentGeometry":
        return cls(2.0 * per_side_m, per_side_m, true_leak_from_left_m)

    @property
    def true_leak_from_right_m(self) -> Optional[float]:
        if self.true_leak_from_left_m is None:
            return None
        return self.spacing_L_m - self.true_leak_from_left_m


@dataclass(frozen=True)
class RecordingPair:
    """
    Left (sensor 2) and right (sensor 1) recordings on a common sample grid.

    start_offset_s is the sub-sample start-time difference (left minus right)
    left over after alignment. It is kept, not resampled away.
    """
    left: SensorRecording
    right: SensorRecording
    geometry: DeploymentGeometry
    start_offset_s: float = 0.0

    def __post_init__(self):
        _check_labels(self.left, self.right)
        if self.left.series.sample_rate_hz != self.right.series.sample_rate_hz:
            raise RateMismatchError(
                f"left rate {self.left.series.sample_rate_hz} Hz != right rate {self.right.series.sample_rate_hz} Hz"
            )
        if len(self.left.series) != len(self.right.series):
            raise PairMismatchError(
                f"aligned series differ in length ({len(self.left.series)} vs {len(self.right.series)})"
            )

    @property
    def sample_rate_hz(self) -> float:
        return self.left.series.sample_rate_hz

    @property
    def scenario(self) -> Scenario:
        return self.left.scenario

    @property
    def pressure_kgfcm2(self) -> float:
        return self.left.pressure_kgfcm2

    @property
    def flow_lpm(self) -> float:
        return self.left.flow_lpm

    def __len__(self) -> int:
        return len(self.left.series)


def _check_labels(left: SensorRecording, right: SensorRecording) -> None:
    if left.side is not Side.LEFT or right.side is not Side.RIGHT:
        raise PairMismatchError(
            f"expected Left/Right recordings, got {left.side.value}/{right.side.value}"
        )
    if left.scenario is not right.scenario:
        raise PairMismatchError(f"scenario labels differ: {left.scenario.value} vs {right.scenario.value}")
    if left.pressure_kgfcm2 != right.pressure_kgfcm2 or left.flow_lpm != right.flow_lpm:
        raise PairMismatchError(
            f"pressure/flow labels differ: ({left.pressure_kgfcm2}, {left.flow_lpm}) "
            f"vs ({right.pressure_kgfcm2}, {right.flow_lpm})"
        )


# ---------------------------------------------------------------------------
# CSV ingestion

def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRowError(f"non-numeric {column} value {text.strip()!r}", line) from None
    if not math.isfinite(value):
        raise MalformedRowError(f"non-finite {column} value {text.strip()!r}", line)
    return value


def _infer_rate(t: np.ndarray) -> float:
    period = t[1] - t[0]
    if not period > 0:
        raise NonUniformSamplingError(
            f"timestamps must increase; first two rows are t={t[0]!r} and t={t[1]!r}"
        )
    return float(f"{1.0 / period:.{RATE_SIGNIFICANT_DIGITS}g}")


def _check_uniform(t: np.ndarray, sample_rate_hz: float) -> None:
    period = 1.0 / sample_rate_hz
    gaps = np.diff(t)
    deviation = np.abs(gaps - period)
    bad = np.flatnonzero(deviation > UNIFORMITY_TOLERANCE * period)
    if bad.size:
        i = int(bad[0])
        raise NonUniformSamplingError(
            f"gap of {gaps[i]:.6g} s between rows {i + 1} and {i + 2} "
            f"deviates from the {period:.6g} s sample period"
        )


def parse_recording(
    csv_text: Union[str, TextIO],
    meta: RecordingMeta,
    sample_rate_hz: Optional[float] = None,
) -> SensorRecording:
    """
    Parse sensor CSV text into a SensorRecording.

    Args:
        csv_text: CSV text or an open text stream
        meta: labels for the recording
        sample_rate_hz: explicit rate; needed only for single-row files

    Raises:
        EmptyFileError, MalformedRowError, NonUniformSamplingError
    """
    text = csv_text if isinstance(csv_text, str) else csv_text.read()
    if text.startswith("\ufeff"):
        text = text[1:]
    if not text.strip():
        raise EmptyFileError("recording is empty")

    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader)
    if tuple(h.strip().lower() for h in header) != CSV_HEADER:
        raise MalformedRowError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}", 1)

    rows = []
    for line, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedRowError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", line)
        rows.append([_parse_float(v, line, c) for v, c in zip(row, CSV_HEADER)])

    if not rows:
        raise EmptyFileError("recording has a header but no data rows")

    data = np.asarray(rows, dtype=np.float64)
    t = data[:, 0]
    if sample_rate_hz is None:
        if len(t) < 2:
            raise MalformedRowError("at least two rows are needed to infer the sample rate")
        sample_rate_hz = _infer_rate(t)
    _check_uniform(t, sample_rate_hz)

    series = TriAxialSeries(sample_rate_hz=sample_rate_hz, start_time_s=float(t[0]), samples=data[:, 1:])
    logger.debug(
        "parsed recording sensor=%s rows=%d rate_hz=%s start_s=%s",
        meta.sensor_id, len(series), sample_rate_hz, series.start_time_s,
    )
    return SensorRecording.from_meta(series, meta)


def read_recording(path: Union[str, Path], meta: RecordingMeta, sample_rate_hz: Optional[float] = None) -> SensorRecording:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return parse_recording(f, meta, sample_rate_hz=sample_rate_hz)


def _fmt(value: float) -> str:
    # 17 significant digits round-trips every double
    return format(value, ".17g")


def format_recording(recording: Union[SensorRecording, TriAxialSeries]) -> str:
    """Serialise to sensor CSV text with LF line endings"""
    series = recording.series if isinstance(recording, SensorRecording) else recording
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    times = series.times()
    for t, (ax, ay, az) in zip(times, series.samples):
        writer.writerow((_fmt(float(t)), _fmt(float(ax)), _fmt(float(ay)), _fmt(float(az))))
    return out.getvalue()


def write_recording(recording: Union[SensorRecording, TriAxialSeries], path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(format_recording(recording))
    return path


# ---------------------------------------------------------------------------
# Alignment

def align_series(a: TriAxialSeries, b: TriAxialSeries) -> Tuple[TriAxialSeries, TriAxialSeries, float]:
    """
    Trim two series to their common time window and equal length.

    The start-time difference is split into a whole number of samples, which
    is trimmed away, and a sub-sample residual (b's start minus a's start
    after trimming). A residual below a millionth of a sample is
    timestamp rounding and comes back as exactly 0.0.

    Raises:
        RateMismatchError, NoOverlapError
    """
    if a.sample_rate_hz != b.sample_rate_hz:
        raise RateMismatchError(f"sample rates differ: {a.sample_rate_hz} Hz vs {b.sample_rate_hz} Hz")
    fs = a.sample_rate_hz
    shift = int(round((b.start_time_s - a.start_time_s) * fs))

    a_start = max(shift, 0)
    b_start = max(-shift, 0)
    n = min(len(a) - a_start, len(b) - b_start)
    if n <= 0:
        raise NoOverlapError(
            f"series do not overlap: a spans [{a.start_time_s}, {a.start_time_s + a.duration_s}) s, "
            f"b spans [{b.start_time_s}, {b.start_time_s + b.duration_s}) s"
        )

    a_out = a.slice(a_start, a_start + n)
    b_out = b.slice(b_start, b_start + n)
    residual = b_out.start_time_s - a_out.start_time_s
    if abs(residual) < RESIDUAL_SNAP / fs:
        residual = 0.0
    return a_out, b_out, residual


def align_pair(left: SensorRecording, right: SensorRecording, geometry: DeploymentGeometry) -> RecordingPair:
    """
    Align left and right recordings onto a common window.

    Only whole samples are dropped; no sample is ever synthesised. The
    sub-sample start offset (left minus right) is stored on the pair.

    Raises:
        RateMismatchError, NoOverlapError, PairMismatchError
    """
    _check_labels(left, right)
    right_series, left_series, residual = align_series(right.series, left.series)
    if len(left_series) < len(left.series) or len(right_series) < len(right.series):
        logger.debug(
            "aligned pair trimmed left=%d->%d right=%d->%d offset_s=%.3g",
            len(left.series), len(left_series), len(right.series), len(right_series), residual,
        )
    return RecordingPair(
        left=left.with_series(left_series),
        right=right.with_series(right_series),
        geometry=geometry,
        start_offset_s=residual,
    )
