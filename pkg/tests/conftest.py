import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure local workspace package is used (prepend to take precedence over site-packages)
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from leakloc.signal_core import (  # noqa: E402
    DeploymentGeometry,
    RecordingMeta,
    SensorRecording,
    Side,
    TriAxialSeries,
    align_pair,
)


def make_series(samples, sample_rate_hz: float = 100.0, start_time_s: float = 0.0) -> TriAxialSeries:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = np.column_stack([samples, samples, samples])
    return TriAxialSeries(sample_rate_hz, start_time_s, samples)


def make_recording(series: TriAxialSeries, side: Side, scenario: str = "NoLeak",
                   pressure: float = 1.0, flow: float = 18.5) -> SensorRecording:
    sensor = "sensor2" if side is Side.LEFT else "sensor1"
    return SensorRecording.from_meta(series, RecordingMeta(sensor, side, scenario, pressure, flow))


def make_pair(left: TriAxialSeries, right: TriAxialSeries, spacing: float = 2.0,
              scenario: str = "NoLeak", truth=None):
    geometry = DeploymentGeometry(spacing, spacing / 2.0, truth)
    return align_pair(
        make_recording(left, Side.LEFT, scenario),
        make_recording(right, Side.RIGHT, scenario),
        geometry,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
