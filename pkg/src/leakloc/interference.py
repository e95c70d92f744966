"""
Baseline-driven interference removal.

Rotating machinery on the rig (motor, water pump, valve) shows up as stable
spectral lines. A profile of those lines is estimated from a no-leak
recording and each line is notched out of later recordings. Mean removal is
always applied first so ADXL bias never reaches the correlator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.signal import filtfilt, find_peaks, iirnotch, welch

from .config import DEFAULT_ESTIMATION_WINDOW, DEFAULT_NOTCH_BANDWIDTH_HZ, DEFAULT_TOP_K
from .errors import NyquistViolationError, SchemaError, TooShortError
from .json_compat import dumps as json_dumps, loads as json_loads
from .models import ProfileDocument, validate_document
from .signal_core import Axis, TriAxialSeries

logger = logging.getLogger(__name__)

# Lines closer than this many frequency bins are one line
MERGE_BINS = 2.0


class InterferenceSource(str, Enum):
    MOTOR = "Motor"
    PUMP = "Pump"
    VALVE = "Valve"
    COMBINED = "Combined"

    @classmethod
    def parse(cls, value: Union[str, "InterferenceSource"]) -> "InterferenceSource":
        if isinstance(value, InterferenceSource):
            return value
        for member in cls:
            if member.value.lower() == str(value).strip().lower():
                return member
        raise ValueError(f"unknown interference source {value!r}")


@dataclass(frozen=True)
class InterferenceProfile:
    """Dominant (frequency_hz, magnitude_g) lines of a no-leak baseline, sorted by frequency"""
    source: InterferenceSource
    pressure_kgfcm2: float
    bins: Tuple[Tuple[float, float], ...]
    estimation_window: int = DEFAULT_ESTIMATION_WINDOW
    sample_rate_hz: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "source", InterferenceSource.parse(self.source))
        bins = tuple((float(f), float(m)) for f, m in self.bins)
        if self.estimation_window < 1:
            raise ValueError(f"estimation_window must be positive, got {self.estimation_window}")
        upper = self.sample_rate_hz / 2.0 if self.sample_rate_hz else math.inf
        for f, m in bins:
            if not 0 <= f <= upper:
                raise ValueError(f"line frequency {f} Hz outside [0, {upper}] Hz")
            if not m >= 0:
                raise ValueError(f"line magnitude must be non-negative, got {m}")
        if any(bins[i][0] > bins[i + 1][0] for i in range(len(bins) - 1)):
            raise ValueError("profile bins must be sorted by frequency")
        object.__setattr__(self, "bins", bins)

    @property
    def frequencies(self) -> List[float]:
        return [f for f, _ in self.bins]

    @classmethod
    def empty(cls, source: Union[str, InterferenceSource] = InterferenceSource.COMBINED,
              pressure_kgfcm2: float = 0.0) -> "InterferenceProfile":
        return cls(source=source, pressure_kgfcm2=pressure_kgfcm2, bins=())


def _refine_peak(magnitude: np.ndarray, i: int) -> Tuple[float, float]:
    """Parabolic interpolation on the log magnitude around bin i"""
    if i <= 0 or i >= len(magnitude) - 1:
        return float(i), float(magnitude[i])
    tiny = np.finfo(float).tiny
    alpha, beta, gamma = np.log(np.maximum(magnitude[i - 1:i + 2], tiny))
    denom = alpha - 2.0 * beta + gamma
    if denom >= 0:
        return float(i), float(magnitude[i])
    p = float(np.clip(0.5 * (alpha - gamma) / denom, -0.5, 0.5))
    peak = beta - 0.25 * (alpha - gamma) * p
    return i + p, float(np.exp(peak))


def _axis_lines(
    x: np.ndarray,
    fs: float,
    window: int,
    top_k: int,
    min_prominence_db: float,
) -> List[Tuple[float, float]]:
    freqs, power = welch(
        x, fs=fs, window="hann", nperseg=window, noverlap=window // 2,
        detrend="constant", scaling="spectrum",
    )
    magnitude = np.sqrt(2.0 * power)  # sinusoid amplitude in g
    floor = np.median(magnitude) * 10.0 ** (min_prominence_db / 20.0)
    peaks, _ = find_peaks(magnitude)
    peaks = peaks[magnitude[peaks] > floor]
    strongest = peaks[np.argsort(magnitude[peaks], kind="stable")[::-1][:top_k]]

    resolution = fs / window
    lines = []
    for i in strongest:
        position, value = _refine_peak(magnitude, int(i))
        lines.append((min(max(position * resolution, 0.0), fs / 2.0), value))
    return lines


def estimate_profile(
    baseline: TriAxialSeries,
    source: Union[str, InterferenceSource] = InterferenceSource.COMBINED,
    top_k: int = DEFAULT_TOP_K,
    estimation_window: int = DEFAULT_ESTIMATION_WINDOW,
    pressure_kgfcm2: float = 0.0,
    min_prominence_db: float = 6.0,
) -> InterferenceProfile:
    """
    Estimate the dominant interference lines of a no-leak baseline.

    Each axis contributes its top_k spectral peaks (Welch magnitude spectrum
    of the mean-removed signal, Hann window of estimation_window samples).
    Peaks from different axes within two bins of each other are merged,
    keeping the larger magnitude.

    Raises:
        TooShortError: baseline shorter than estimation_window
    """
    if top_k < 1:
        raise ValueError(f"top_k must be at least 1, got {top_k}")
    if len(baseline) < estimation_window:
        raise TooShortError(
            f"baseline has {len(baseline)} samples, estimation window needs {estimation_window}"
        )
    fs = baseline.sample_rate_hz
    candidates: List[Tuple[float, float]] = []
    for axis in Axis:
        raw = baseline.axis(axis)
        x = raw - raw.mean()
        scale = max(float(np.max(np.abs(raw))), 1.0)
        if float(np.max(np.abs(x))) <= 1e-12 * scale:
            continue  # constant axis, nothing but DC
        candidates.extend(_axis_lines(x, fs, estimation_window, top_k, min_prominence_db))

    merged: List[Tuple[float, float]] = []
    tolerance = MERGE_BINS * fs / estimation_window
    for f, m in sorted(candidates, key=lambda line: (-line[1], line[0])):
        if all(abs(f - g) > tolerance for g, _ in merged):
            merged.append((f, m))
    merged.sort()

    logger.debug(
        "estimated profile source=%s lines=%s",
        InterferenceSource.parse(source).value, ["%.2f" % f for f, _ in merged],
    )
    return InterferenceProfile(
        source=source,
        pressure_kgfcm2=pressure_kgfcm2,
        bins=tuple(merged),
        estimation_window=estimation_window,
        sample_rate_hz=fs,
    )


def _padlen(n: int, a: np.ndarray, b: np.ndarray) -> int:
    return min(3 * max(len(a), len(b)), n - 1)


def filter_series(
    series: TriAxialSeries,
    profile: InterferenceProfile,
    bandwidth_hz: float = DEFAULT_NOTCH_BANDWIDTH_HZ,
) -> TriAxialSeries:
    """
    Remove the mean and notch every profile line out of each axis.

    Notches are second-order IIR sections with the given -3 dB bandwidth,
    run forward and backward so they add no phase shift (and no lag). The
    output keeps the input's length, rate and start time.

    Raises:
        NyquistViolationError: a line sits at or above the Nyquist frequency
    """
    if not bandwidth_hz > 0:
        raise ValueError(f"bandwidth_hz must be positive, got {bandwidth_hz}")
    fs = series.sample_rate_hz
    nyquist = series.nyquist_hz
    for f in profile.frequencies:
        if f >= nyquist:
            raise NyquistViolationError(f"line at {f} Hz is not below the {nyquist} Hz Nyquist frequency")

    data = series.samples - series.samples.mean(axis=0)
    n = data.shape[0]
    if n < 2:
        return series.with_samples(data)
    for f in profile.frequencies:
        if f <= 0:
            logger.debug("skipping notch at %s Hz; mean removal covers DC", f)
            continue
        b, a = iirnotch(f, f / bandwidth_hz, fs=fs)
        data = filtfilt(b, a, data, axis=0, padlen=_padlen(n, a, b))
    return series.with_samples(data)


def profile_to_dict(profile: InterferenceProfile) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "source": profile.source.value,
        "pressure_kgfcm2": profile.pressure_kgfcm2,
        "estimation_window": profile.estimation_window,
        "bins": [{"frequency_hz": f, "magnitude": m} for f, m in profile.bins],
    }
    if profile.sample_rate_hz is not None:
        doc["sample_rate_hz"] = profile.sample_rate_hz
    return doc


def profile_from_dict(data: Dict[str, Any], source: str = "profile") -> InterferenceProfile:
    doc = validate_document(ProfileDocument, data, source=source)
    bins = []
    for entry in doc.bins:
        try:
            bins.append((float(entry["frequency_hz"]), float(entry["magnitude"])))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"{source}: bad bin {entry!r}: {e}") from e
    return InterferenceProfile(
        source=doc.source,
        pressure_kgfcm2=doc.pressure_kgfcm2,
        bins=tuple(bins),
        estimation_window=doc.estimation_window,
        sample_rate_hz=getattr(doc, "sample_rate_hz", None),
    )


def save_profile(profile: InterferenceProfile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json_dumps(profile_to_dict(profile), indent=True, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_profile(path: Union[str, Path]) -> InterferenceProfile:
    path = Path(path)
    return profile_from_dict(json_loads(path.read_text(encoding="utf-8")), source=str(path))
