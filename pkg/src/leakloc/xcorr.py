"""
Cross-correlation of paired sensor axes and peak-lag estimation.

Lag convention: r[k] = sum_n s1[n] * s2[n + k] for k in [-(N-1), N-1].
A positive peak lag means the common feature reaches s2 later than s1.
The pipeline always passes the right sensor as s1 and the left sensor as s2.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, Optional, TextIO, Union

import numpy as np
from scipy.signal import correlate

from .config import DEFAULT_THRESHOLD_S
from .errors import DegenerateInputError, LengthMismatchError, MalformedRowError, RateMismatchError
from .signal_core import Axis, Scenario, TriAxialSeries
from .utils import run_ordered

logger = logging.getLogger(__name__)

METHODS = ("fft", "direct")
CORRELATION_HEADER = ("lag_s", "value")


@dataclass(frozen=True, eq=False)
class CorrelationFunction:
    """Correlation values over lags -(N-1)/fs ... (N-1)/fs"""
    lags_s: np.ndarray
    values: np.ndarray
    normalized: bool
    sample_rate_hz: float
    axis: Optional[Axis] = None

    def __post_init__(self):
        lags = np.array(self.lags_s, dtype=np.float64, copy=True)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if lags.ndim != 1 or lags.shape != values.shape:
            raise ValueError(f"lags and values must be 1-D and equal length, got {lags.shape} and {values.shape}")
        if lags.size == 0 or lags.size % 2 == 0:
            raise ValueError(f"a full correlation has an odd number of lags, got {lags.size}")
        if not (math.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        lags.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "lags_s", lags)
        object.__setattr__(self, "values", values)
        if self.axis is not None:
            object.__setattr__(self, "axis", Axis.parse(self.axis))

    def __len__(self) -> int:
        return self.values.size

    @property
    def input_length(self) -> int:
        return (self.values.size + 1) // 2

    @property
    def lag_indices(self) -> np.ndarray:
        n = self.input_length
        return np.arange(-(n - 1), n)

    def value_at(self, lag_index: int) -> float:
        return float(self.values[lag_index + self.input_length - 1])


@dataclass(frozen=True)
class DelayEstimate:
    peak_lag_s: float
    peak_value: float
    lag_index: int
    axis: Optional[Axis] = None
    classification: Optional[Scenario] = None

    def classified(self, classification: Scenario) -> "DelayEstimate":
        return replace(self, classification=Scenario.parse(classification))


def _as_signal(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise LengthMismatchError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _is_flat(raw: np.ndarray, centered: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(raw))), 1.0)
    return float(np.max(np.abs(centered))) <= 1e-12 * scale


def _fft_correlate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = x.size
    size = 1 << (2 * n - 2).bit_length()
    spectrum = np.conj(np.fft.rfft(x, size)) * np.fft.rfft(y, size)
    circular = np.fft.irfft(spectrum, size)
    # negative lags wrap to the end of the circular result
    return np.concatenate((circular[size - (n - 1):], circular[:n]))


def cross_correlate(
    s1,
    s2,
    sample_rate_hz: float,
    normalized: bool = True,
    axis: Optional[Union[str, Axis]] = None,
    method: str = "fft",
) -> CorrelationFunction:
    """
    Correlate two equal-length single-axis signals.

    Both inputs are mean-removed first. With normalized=True the values are
    divided by sqrt(sum(s1^2) * sum(s2^2)) so they lie in [-1, 1].

    Raises:
        LengthMismatchError: lengths differ or are below 2
        DegenerateInputError: a zero-variance input with normalized=True
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    raw1 = _as_signal(s1, "s1")
    raw2 = _as_signal(s2, "s2")
    if raw1.size != raw2.size:
        raise LengthMismatchError(f"inputs differ in length ({raw1.size} vs {raw2.size})")
    n = raw1.size
    if n < 2:
        raise LengthMismatchError(f"need at least 2 samples, got {n}")

    x = raw1 - raw1.mean()
    y = raw2 - raw2.mean()
    # Operands go in a fixed order and the swapped case is reversed, so
    # cross_correlate(s2, s1) is cross_correlate(s1, s2) reversed bit for bit.
    # Equal operands give an autocorrelation, which is made exactly even.
    x_key, y_key = x.tobytes(), y.tobytes()
    swap = x_key > y_key
    a, b = (y, x) if swap else (x, y)
    if method == "fft":
        values = _fft_correlate(a, b)
    else:
        values = correlate(b, a, mode="full", method="direct")
    if swap:
        values = values[::-1]
    elif x_key == y_key:
        values = 0.5 * (values + values[::-1])

    if normalized:
        if _is_flat(raw1, x) or _is_flat(raw2, y):
            raise DegenerateInputError("cannot normalise the correlation of a zero-variance signal")
        values = values / math.sqrt(float(np.dot(x, x)) * float(np.dot(y, y)))

    lags = np.arange(-(n - 1), n) / sample_rate_hz
    return CorrelationFunction(lags, values, normalized, sample_rate_hz, axis)


def _parabolic_offset(corr: CorrelationFunction, i: int) -> float:
    if i <= 0 or i >= len(corr) - 1:
        return 0.0
    a, b, c = corr.values[i - 1:i + 2]
    denom = a - 2.0 * b + c
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))


def find_peak(corr: CorrelationFunction, interpolate: bool = False) -> DelayEstimate:
    """
    Lag of the highest correlation value (not the largest magnitude).

    Ties go to the smallest |lag|, then to the negative lag. With
    interpolate=True the lag is refined by a parabola through the peak and
    its neighbours; peak_value stays the sampled maximum.
    """
    values = corr.values
    peak = float(values.max())
    candidates = corr.lag_indices[np.flatnonzero(values == peak)]
    k = int(min(candidates, key=lambda lag: (abs(int(lag)), lag > 0)))

    lag_s = k / corr.sample_rate_hz
    if interpolate:
        lag_s = (k + _parabolic_offset(corr, k + corr.input_length - 1)) / corr.sample_rate_hz
    return DelayEstimate(peak_lag_s=lag_s, peak_value=peak, lag_index=k, axis=corr.axis)


def classify(estimate: DelayEstimate, threshold_s: float = DEFAULT_THRESHOLD_S) -> DelayEstimate:
    """|peak lag| <= threshold is NoLeak, anything further out is Leak"""
    if not threshold_s > 0:
        raise ValueError(f"threshold_s must be positive, got {threshold_s}")
    label = Scenario.NO_LEAK if abs(estimate.peak_lag_s) <= threshold_s else Scenario.LEAK
    return estimate.classified(label)


def estimate_delay(
    corr: CorrelationFunction,
    threshold_s: float = DEFAULT_THRESHOLD_S,
    interpolate: bool = False,
) -> DelayEstimate:
    return classify(find_peak(corr, interpolate=interpolate), threshold_s)


def correlate_axes(
    first: TriAxialSeries,
    second: TriAxialSeries,
    axes: Iterable[Union[str, Axis]] = tuple(Axis),
    normalized: bool = True,
    method: str = "fft",
    max_concurrent: int = 1,
) -> Dict[Axis, CorrelationFunction]:
    """
    Correlate matching axes of two aligned series (first is s1, second is s2).

    Axes may run on a thread pool; the result is keyed and ordered by axis.
    """
    if first.sample_rate_hz != second.sample_rate_hz:
        raise RateMismatchError(
            f"sample rates differ: {first.sample_rate_hz} Hz vs {second.sample_rate_hz} Hz"
        )
    axes = [Axis.parse(a) for a in axes]

    def _one(axis: Axis) -> CorrelationFunction:
        return cross_correlate(
            first.axis(axis), second.axis(axis), first.sample_rate_hz,
            normalized=normalized, axis=axis, method=method,
        )

    results = run_ordered(_one, axes, max_concurrent=max_concurrent)
    logger.debug("correlated axes=%s n=%d method=%s", [a.value for a in axes], len(first), method)
    return dict(zip(axes, results))


# ---------------------------------------------------------------------------
# Plot data

def format_correlation(corr: CorrelationFunction) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CORRELATION_HEADER)
    for lag, value in zip(corr.lags_s, corr.values):
        writer.writerow((format(float(lag), ".17g"), format(float(value), ".17g")))
    return out.getvalue()


def export_correlation(corr: CorrelationFunction, path: Union[str, Path]) -> Path:
    """Write the two-column lag_s,value CSV"""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(format_correlation(corr))
    return path


def parse_correlation(
    text: Union[str, TextIO],
    normalized: bool = True,
    axis: Optional[Union[str, Axis]] = None,
) -> CorrelationFunction:
    text = text if isinstance(text, str) else text.read()
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CORRELATION_HEADER:
        raise MalformedRowError(f"expected header {','.join(CORRELATION_HEADER)}", 1)
    lags, values = [], []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedRowError(f"expected 2 fields, got {len(row)}", line)
        try:
            lags.append(float(row[0]))
            values.append(float(row[1]))
        except ValueError:
            raise MalformedRowError(f"non-numeric row {row!r}", line) from None
    if len(lags) < 3:
        raise MalformedRowError("a correlation needs at least 3 lags")
    sample_rate_hz = float(f"{1.0 / (lags[1] - lags[0]):.9g}")
    return CorrelationFunction(np.array(lags), np.array(values), normalized, sample_rate_hz, axis)


def read_correlation(
    path: Union[str, Path],
    normalized: bool = True,
    axis: Optional[Union[str, Axis]] = None,
) -> CorrelationFunction:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return parse_correlation(f, normalized=normalized, axis=axis)
