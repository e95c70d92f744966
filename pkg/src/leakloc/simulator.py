"""
Synthetic two-sensor recordings with known ground truth.

A band-limited random leak source reaches the right sensor (sensor 1) after
d_right / c and the left sensor (sensor 2) after d_left / c. Machinery
interference is common to both sensors with no relative delay. The content of
sensor 2 additionally runs clock_skew_s late while both files keep the same
timestamps, the way two separate capture sessions drift. White noise is added
per channel.

Ground truth: dt = (d_left - d_right) / c = (2 d_left - L) / c.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .data import flow_for_pressure
from .errors import InvalidConfigError, SchemaError
from .hydraulics import FlowMeasurement, PipeSpec, flow_for_speed, wave_speed, DEFAULT_PIPE_DIAMETER_M
from .interference import InterferenceSource
from .json_compat import dumps as json_dumps, loads as json_loads
from .models import FixtureManifest, GridDocument, ScenarioDocument, validate_document
from .signal_core import (
    DeploymentGeometry,
    RecordingMeta,
    RecordingPair,
    Scenario,
    SensorRecording,
    Side,
    TriAxialSeries,
    align_pair,
    read_recording,
    write_recording,
)
from .utils import run_ordered

logger = logging.getLogger(__name__)

MIN_SAMPLES = 64
SPEED_TOLERANCE = 1e-6
LEFT_FILE = "left.csv"
RIGHT_FILE = "right.csv"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class InterferenceTone:
    source: InterferenceSource
    frequency_hz: float
    amplitude_g: float

    def __post_init__(self):
        try:
            object.__setattr__(self, "source", InterferenceSource.parse(self.source))
        except ValueError as e:
            raise InvalidConfigError(str(e)) from None
        if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0):
            raise InvalidConfigError(f"tone frequency must be positive, got {self.frequency_hz}")
        if not (math.isfinite(self.amplitude_g) and self.amplitude_g >= 0):
            raise InvalidConfigError(f"tone amplitude must be non-negative, got {self.amplitude_g}")


# Frequencies on a 0.01 Hz grid repeat jointly only every 100 s
DEFAULT_TONES: Tuple[InterferenceTone, ...] = (
    InterferenceTone(InterferenceSource.MOTOR, 11.73, 0.01),
    InterferenceTone(InterferenceSource.PUMP, 23.17, 0.01),
    InterferenceTone(InterferenceSource.VALVE, 37.31, 0.01),
)


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One simulated capture. leak_from_left_m=None means no leak.

    leak_bandwidth_hz defaults to (5, fs/4). snr_db is measured against the
    leak RMS (or the interference RMS when the leak amplitude is zero);
    math.inf disables noise.
    """
    spacing_L_m: float
    wave_speed_mps: float
    leak_from_left_m: Optional[float] = None
    per_side_m: Optional[float] = None
    sample_rate_hz: float = 100.0
    duration_s: float = 480.0
    clock_skew_s: float = 0.0
    interference_tones: Tuple[InterferenceTone, ...] = DEFAULT_TONES
    leak_bandwidth_hz: Optional[Tuple[float, float]] = None
    leak_amplitude_g: float = 0.05
    snr_db: float = 20.0
    attenuation_db_per_m: float = 0.0
    rng_seed: int = 0
    pressure_kgfcm2: float = 0.0
    flow_lpm: Optional[float] = None
    pipe_diameter_m: float = DEFAULT_PIPE_DIAMETER_M

    def __post_init__(self):
        if not (math.isfinite(self.spacing_L_m) and self.spacing_L_m > 0):
            raise InvalidConfigError(f"spacing_L_m must be positive, got {self.spacing_L_m}")
        if not (math.isfinite(self.wave_speed_mps) and self.wave_speed_mps > 0):
            raise InvalidConfigError(f"wave_speed_mps must be positive, got {self.wave_speed_mps}")
        if self.leak_from_left_m is not None and not 0 <= self.leak_from_left_m <= self.spacing_L_m:
            raise InvalidConfigError(
                f"leak_from_left_m must lie in [0, {self.spacing_L_m}], got {self.leak_from_left_m}"
            )
        if self.per_side_m is not None and abs(2.0 * self.per_side_m - self.spacing_L_m) > 1e-9:
            raise InvalidConfigError(
                f"per_side_m {self.per_side_m} does not match spacing_L_m {self.spacing_L_m}"
            )
        if not (math.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise InvalidConfigError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not (math.isfinite(self.duration_s) and self.num_samples >= MIN_SAMPLES):
            raise InvalidConfigError(
                f"duration_s x sample_rate_hz must give at least {MIN_SAMPLES} samples, "
                f"got {self.duration_s} s at {self.sample_rate_hz} Hz"
            )
        if not math.isfinite(self.clock_skew_s):
            raise InvalidConfigError(f"clock_skew_s must be finite, got {self.clock_skew_s}")

        nyquist = self.sample_rate_hz / 2.0
        tones = tuple(self.interference_tones)
        for tone in tones:
            if tone.frequency_hz >= nyquist:
                raise InvalidConfigError(f"tone at {tone.frequency_hz} Hz is not below Nyquist ({nyquist} Hz)")
        object.__setattr__(self, "interference_tones", tones)

        band = self.leak_bandwidth_hz or (5.0, self.sample_rate_hz / 4.0)
        low, high = (float(b) for b in band)
        if not 0 <= low < high <= nyquist:
            raise InvalidConfigError(f"leak_bandwidth_hz must satisfy 0 <= low < high <= {nyquist}, got {band}")
        object.__setattr__(self, "leak_bandwidth_hz", (low, high))

        if not (math.isfinite(self.leak_amplitude_g) and self.leak_amplitude_g >= 0):
            raise InvalidConfigError(f"leak_amplitude_g must be non-negative, got {self.leak_amplitude_g}")
        if math.isnan(self.snr_db):
            raise InvalidConfigError("snr_db must not be NaN")
        if not self.attenuation_db_per_m >= 0:
            raise InvalidConfigError(f"attenuation_db_per_m must be non-negative, got {self.attenuation_db_per_m}")

        spec = self.pipe
        implied_flow = flow_for_speed(self.wave_speed_mps, spec)
        if self.flow_lpm is None:
            object.__setattr__(self, "flow_lpm", implied_flow)
        elif abs(wave_speed(FlowMeasurement(self.flow_lpm), spec) - self.wave_speed_mps) > SPEED_TOLERANCE * self.wave_speed_mps:
            raise InvalidConfigError(
                f"flow_lpm {self.flow_lpm} implies {wave_speed(FlowMeasurement(self.flow_lpm), spec):.6g} m/s, "
                f"not the configured {self.wave_speed_mps} m/s"
            )

    @property
    def pipe(self) -> PipeSpec:
        try:
            return PipeSpec(self.pipe_diameter_m)
        except ValueError as e:
            raise InvalidConfigError(str(e)) from None

    @property
    def num_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    @property
    def has_leak(self) -> bool:
        return self.leak_from_left_m is not None

    @property
    def scenario(self) -> Scenario:
        return Scenario.LEAK if self.has_leak else Scenario.NO_LEAK

    @property
    def ground_truth_dt_s(self) -> Optional[float]:
        if not self.has_leak:
            return None
        return (2.0 * self.leak_from_left_m - self.spacing_L_m) / self.wave_speed_mps

    @property
    def flow(self) -> FlowMeasurement:
        return FlowMeasurement(self.flow_lpm, self.pressure_kgfcm2)

    @property
    def geometry(self) -> DeploymentGeometry:
        return DeploymentGeometry(self.spacing_L_m, self.per_side_m, self.leak_from_left_m)


@dataclass(frozen=True)
class SimulatedScenario:
    pair: RecordingPair
    config: Optional[ScenarioConfig]
    ground_truth_dt_s: Optional[float]
    flow: FlowMeasurement = field(default_factory=lambda: FlowMeasurement(0.0))
    pipe: PipeSpec = field(default_factory=PipeSpec)
    clock_skew_s: float = 0.0
    rng_seed: int = 0


# ---------------------------------------------------------------------------
# Signal synthesis

def _band_limited_source(rng: np.random.Generator, length: int, fs: float,
                         band: Tuple[float, float]) -> np.ndarray:
    """Spectrum of periodic white noise masked to the band, unit RMS"""
    spectrum = np.fft.rfft(rng.standard_normal(length))
    freqs = np.fft.rfftfreq(length, d=1.0 / fs)
    spectrum[(freqs < band[0]) | (freqs > band[1])] = 0.0
    spectrum[0] = 0.0
    power = np.sum(np.abs(spectrum) ** 2)
    if power == 0:
        raise InvalidConfigError(f"leak band {band} Hz contains no frequency bin at this duration")
    # Parseval for a real signal from its one-sided spectrum
    weights = np.full(freqs.size, 2.0)
    weights[0] = 1.0
    if length % 2 == 0:
        weights[-1] = 1.0
    rms = math.sqrt(float(np.sum(weights * np.abs(spectrum) ** 2)) / length ** 2)
    return spectrum / rms


def _delayed(spectrum: np.ndarray, length: int, fs: float, delay_s: float,
             offset: int, n: int) -> np.ndarray:
    """n samples of the periodic source delayed by delay_s, starting at offset"""
    freqs = np.fft.rfftfreq(length, d=1.0 / fs)
    shifted = spectrum * np.exp(-2j * np.pi * freqs * delay_s)
    if length % 2 == 0:
        # the Nyquist bin of a real signal cannot carry a phase shift
        shifted[-1] = 0.0
    return np.fft.irfft(shifted, length)[offset:offset + n]


def _tones(config: ScenarioConfig, rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.size)
    for tone, phase in zip(config.interference_tones, rng.uniform(0, 2 * np.pi, len(config.interference_tones))):
        out += tone.amplitude_g * np.sin(2 * np.pi * tone.frequency_hz * t + phase)
    return out


def _interference_rms(config: ScenarioConfig) -> float:
    return math.sqrt(sum(tone.amplitude_g ** 2 / 2.0 for tone in config.interference_tones))


def simulate(config: ScenarioConfig) -> SimulatedScenario:
    """
    Generate the left/right recordings for one scenario.

    Deterministic for a given config: every random draw comes from generators
    spawned off rng_seed.
    """
    fs = config.sample_rate_hz
    n = config.num_samples
    leak_rng, gain_rng, tone_rng, noise_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(config.rng_seed).spawn(4)
    )
    t = np.arange(n) / fs
    right = np.zeros((n, 3))
    left = np.zeros((n, 3))

    if config.has_leak and config.leak_amplitude_g > 0:
        d_left = config.leak_from_left_m
        d_right = config.spacing_L_m - d_left
        delays = np.array([d_right / config.wave_speed_mps, d_left / config.wave_speed_mps + config.clock_skew_s])
        delays -= delays.min()
        pad = int(math.ceil(delays.max() * fs)) + MIN_SAMPLES
        length = n + 2 * pad
        spectrum = _band_limited_source(leak_rng, length, fs, config.leak_bandwidth_hz)
        source_right = _delayed(spectrum, length, fs, delays[0], pad, n)
        source_left = _delayed(spectrum, length, fs, delays[1], pad, n)

        gains = gain_rng.uniform(0.5, 1.5, size=(2, 3))
        decay = 10.0 ** (-config.attenuation_db_per_m * np.array([d_right, d_left]) / 20.0)
        amplitude = config.leak_amplitude_g
        right += amplitude * decay[0] * np.outer(source_right, gains[0])
        left += amplitude * decay[1] * np.outer(source_left, gains[1])

    if config.interference_tones:
        tone_gains = tone_rng.uniform(0.5, 1.5, size=3)
        phase_seed = int(tone_rng.integers(0, 2 ** 31))
        right += np.outer(_tones(config, np.random.default_rng(phase_seed), t), tone_gains)
        left += np.outer(_tones(config, np.random.default_rng(phase_seed), t - config.clock_skew_s), tone_gains)

    reference = config.leak_amplitude_g if config.leak_amplitude_g > 0 else _interference_rms(config)
    if math.isfinite(config.snr_db) and reference > 0:
        sigma = reference * 10.0 ** (-config.snr_db / 20.0)
        right += noise_rng.normal(0.0, sigma, size=(n, 3))
        left += noise_rng.normal(0.0, sigma, size=(n, 3))

    labels = dict(scenario=config.scenario, pressure_kgfcm2=config.pressure_kgfcm2, flow_lpm=config.flow_lpm)
    pair = RecordingPair(
        left=SensorRecording.from_meta(
            TriAxialSeries(fs, 0.0, left), RecordingMeta("sensor2", Side.LEFT, **labels)),
        right=SensorRecording.from_meta(
            TriAxialSeries(fs, 0.0, right), RecordingMeta("sensor1", Side.RIGHT, **labels)),
        geometry=config.geometry,
    )
    logger.debug(
        "simulated scenario=%s n=%d spacing_L_m=%s truth_dt_s=%s skew_s=%s seed=%d",
        config.scenario.value, n, config.spacing_L_m, config.ground_truth_dt_s,
        config.clock_skew_s, config.rng_seed,
    )
    return SimulatedScenario(
        pair=pair,
        config=config,
        ground_truth_dt_s=config.ground_truth_dt_s,
        flow=config.flow,
        pipe=config.pipe,
        clock_skew_s=config.clock_skew_s,
        rng_seed=config.rng_seed,
    )


# ---------------------------------------------------------------------------
# Scenario documents

def _tones_from_document(raw: Sequence[Dict[str, Any]]) -> Tuple[InterferenceTone, ...]:
    tones = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise SchemaError(f"interference_tones[{i}] must be an object")
        try:
            tones.append(InterferenceTone(
                source=entry.get("source", InterferenceSource.COMBINED.value),
                frequency_hz=float(entry["frequency_hz"]),
                amplitude_g=float(entry["amplitude_g"]),
            ))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InvalidConfigError):
                raise
            raise SchemaError(f"interference_tones[{i}]: {e}") from e
    return tuple(tones)


def config_from_document(data: Dict[str, Any], source: str = "scenario") -> ScenarioConfig:
    """
    Build a ScenarioConfig from a scenario JSON object.

    Spacing comes from spacing_L_m or 2 x per_side_m; the wave speed from
    wave_speed_mps or from flow_lpm and pipe_diameter_m.

    Raises:
        SchemaError: the document does not match the schema
        InvalidConfigError: the values do not describe a valid scenario
    """
    doc = validate_document(ScenarioDocument, data, source=source)
    spacing = getattr(doc, "spacing_L_m", None)
    per_side = getattr(doc, "per_side_m", None)
    if spacing is None and per_side is None:
        raise InvalidConfigError(f"{source}: spacing_L_m or per_side_m is required")
    if spacing is None:
        spacing = 2.0 * per_side

    speed = getattr(doc, "wave_speed_mps", None)
    flow = getattr(doc, "flow_lpm", None)
    if speed is None and flow is None:
        raise InvalidConfigError(f"{source}: wave_speed_mps or flow_lpm is required")
    if speed is None:
        try:
            speed = wave_speed(FlowMeasurement(flow), PipeSpec(doc.pipe_diameter_m))
        except ValueError as e:
            raise InvalidConfigError(f"{source}: {e}") from None

    kwargs: Dict[str, Any] = dict(
        spacing_L_m=spacing,
        wave_speed_mps=speed,
        leak_from_left_m=getattr(doc, "leak_from_left_m", None),
        per_side_m=per_side,
        sample_rate_hz=doc.sample_rate_hz,
        duration_s=doc.duration_s,
        clock_skew_s=doc.clock_skew_s,
        leak_amplitude_g=doc.leak_amplitude_g,
        snr_db=doc.snr_db,
        attenuation_db_per_m=doc.attenuation_db_per_m,
        rng_seed=doc.rng_seed,
        pressure_kgfcm2=doc.pressure_kgfcm2,
        flow_lpm=flow,
        pipe_diameter_m=doc.pipe_diameter_m,
    )
    tones = getattr(doc, "interference_tones", None)
    if tones is not None:
        kwargs["interference_tones"] = _tones_from_document(tones)
    band = getattr(doc, "leak_bandwidth_hz", None)
    if band is not None:
        if len(band) != 2:
            raise SchemaError(f"{source}: leak_bandwidth_hz must be [low, high]")
        kwargs["leak_bandwidth_hz"] = (band[0], band[1])
    return ScenarioConfig(**kwargs)


def _number_label(value: float) -> str:
    return f"{value:g}"


def scenario_grid(
    pressures: Sequence[float],
    per_side_m: Sequence[float],
    base: Optional[Dict[str, Any]] = None,
    leak_fraction: float = 0.5,
    leak_extra_skew_s: float = 0.0,
    include_no_leak: bool = True,
) -> List[Tuple[str, ScenarioConfig]]:
    """
    Pressure x distance grid of scenarios, flows taken from the bundled table.

    Every cell yields a leak scenario at leak_fraction x L from the left and,
    when include_no_leak is set, the matching no-leak scenario. Leak
    scenarios get leak_extra_skew_s on top of the base clock skew. Seeds are
    base rng_seed plus the scenario's index, so every scenario differs.
    """
    base = dict(base or {})
    for key in ("spacing_L_m", "per_side_m", "leak_from_left_m", "wave_speed_mps", "flow_lpm", "pressure_kgfcm2"):
        if key in base:
            raise InvalidConfigError(f"grid base must not set {key}; the grid supplies it")
    if not 0 <= leak_fraction <= 1:
        raise InvalidConfigError(f"leak_fraction must be in [0, 1], got {leak_fraction}")
    seed = int(base.get("rng_seed", 0))
    skew = float(base.get("clock_skew_s", 0.0))

    grid: List[Tuple[str, ScenarioConfig]] = []
    for pressure in pressures:
        flow = flow_for_pressure(pressure)
        for distance in per_side_m:
            spacing = 2.0 * distance
            variants = [("leak", spacing * leak_fraction, skew + leak_extra_skew_s)]
            if include_no_leak:
                variants.append(("noleak", None, skew))
            for label, leak_at, scenario_skew in variants:
                doc = dict(base)
                doc.update(
                    spacing_L_m=spacing,
                    per_side_m=distance,
                    flow_lpm=flow,
                    pressure_kgfcm2=pressure,
                    clock_skew_s=scenario_skew,
                    rng_seed=seed + len(grid),
                )
                if leak_at is not None:
                    doc["leak_from_left_m"] = leak_at
                name = f"p{_number_label(pressure)}_d{_number_label(distance)}_{label}"
                grid.append((name, config_from_document(doc, source=name)))
    return grid


def grid_from_document(data: Dict[str, Any], source: str = "grid") -> List[Tuple[str, ScenarioConfig]]:
    """Split a grid document into grid keys and the shared scenario base"""
    grid_keys = {"pressures", "per_side_m", "leak_fraction", "leak_extra_skew_s", "include_no_leak"}
    grid_doc = validate_document(GridDocument, {k: v for k, v in data.items() if k in grid_keys}, source=source)
    base = {k: v for k, v in data.items() if k not in grid_keys}
    return scenario_grid(
        grid_doc.pressures,
        grid_doc.per_side_m,
        base=base,
        leak_fraction=grid_doc.leak_fraction,
        leak_extra_skew_s=grid_doc.leak_extra_skew_s,
        include_no_leak=grid_doc.include_no_leak,
    )


# ---------------------------------------------------------------------------
# Fixtures on disk

def _write_json(path: Path, data: Dict[str, Any]) -> None:
    path.write_text(json_dumps(data, indent=True, sort_keys=True) + "\n", encoding="utf-8")


def fixture_manifest(scenario: SimulatedScenario) -> Dict[str, Any]:
    pair = scenario.pair
    geometry = pair.geometry
    manifest: Dict[str, Any] = {
        "scenario": pair.scenario.value,
        "spacing_L_m": geometry.spacing_L_m,
        "per_side_m": geometry.per_side_m,
        "leak_from_left_m": geometry.true_leak_from_left_m,
        "pressure_kgfcm2": pair.pressure_kgfcm2,
        "flow_lpm": pair.flow_lpm,
        "pipe_diameter_m": scenario.pipe.inner_diameter_m,
        "clock_skew_s": scenario.clock_skew_s,
        "rng_seed": scenario.rng_seed,
        "files": [LEFT_FILE, RIGHT_FILE],
        "ground_truth_dt_s": scenario.ground_truth_dt_s,
        "sample_rate_hz": pair.sample_rate_hz,
        "wave_speed_mps": wave_speed(scenario.flow, scenario.pipe),
    }
    return manifest


def write_fixture(scenario: SimulatedScenario, directory: Union[str, Path]) -> Path:
    """
    Write left.csv, right.csv and manifest.json into directory.

    Output bytes depend only on the scenario, so a fixed seed reproduces
    identical files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_recording(scenario.pair.left, directory / LEFT_FILE)
    write_recording(scenario.pair.right, directory / RIGHT_FILE)
    manifest_path = directory / MANIFEST_FILE
    _write_json(manifest_path, fixture_manifest(scenario))
    return manifest_path


def load_fixture(directory: Union[str, Path]) -> SimulatedScenario:
    """Read a fixture directory back into an aligned pair plus its ground truth"""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_FILE
    doc = validate_document(
        FixtureManifest,
        {k: v for k, v in json_loads(manifest_path.read_text(encoding="utf-8")).items() if v is not None},
        source=str(manifest_path),
    )
    if len(doc.files) != 2:
        raise SchemaError(f"{manifest_path}: expected 2 sensor files, got {len(doc.files)}")

    labels = dict(scenario=doc.scenario, pressure_kgfcm2=doc.pressure_kgfcm2, flow_lpm=doc.flow_lpm)
    rate = getattr(doc, "sample_rate_hz", None)
    left = read_recording(directory / doc.files[0], RecordingMeta("sensor2", Side.LEFT, **labels), rate)
    right = read_recording(directory / doc.files[1], RecordingMeta("sensor1", Side.RIGHT, **labels), rate)
    geometry = DeploymentGeometry(
        doc.spacing_L_m, getattr(doc, "per_side_m", None), getattr(doc, "leak_from_left_m", None)
    )
    return SimulatedScenario(
        pair=align_pair(left, right, geometry),
        config=None,
        ground_truth_dt_s=getattr(doc, "ground_truth_dt_s", None),
        flow=FlowMeasurement(doc.flow_lpm, doc.pressure_kgfcm2),
        pipe=PipeSpec(doc.pipe_diameter_m),
        clock_skew_s=doc.clock_skew_s,
        rng_seed=doc.rng_seed,
    )


def write_grid(
    grid: Sequence[Tuple[str, ScenarioConfig]],
    directory: Union[str, Path],
    max_concurrent: int = 1,
) -> Path:
    """
    Simulate and write every grid scenario into its own subdirectory, plus a
    run manifest (manifest.json) that the localize and calibrate commands read.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = [name for name, _ in grid]
    if len(set(names)) != len(names):
        raise InvalidConfigError("grid scenario names must be unique")

    def _one(item: Tuple[str, ScenarioConfig]) -> SimulatedScenario:
        name, config = item
        scenario = simulate(config)
        write_fixture(scenario, directory / name)
        return scenario

    scenarios = run_ordered(_one, grid, max_concurrent=max_concurrent)
    pairs = []
    for (name, config), scenario in zip(grid, scenarios):
        entry: Dict[str, Any] = {
            "name": name,
            "left": f"{name}/{LEFT_FILE}",
            "right": f"{name}/{RIGHT_FILE}",
            "spacing_L_m": config.spacing_L_m,
            "pressure_kgfcm2": config.pressure_kgfcm2,
            "flow_lpm": config.flow_lpm,
            "scenario": config.scenario.value,
        }
        if config.per_side_m is not None:
            entry["per_side_m"] = config.per_side_m
        if config.leak_from_left_m is not None:
            entry["true_leak_from_left_m"] = config.leak_from_left_m
        pairs.append(entry)

    diameters = {config.pipe_diameter_m for _, config in grid}
    if len(diameters) > 1:
        raise InvalidConfigError("all grid scenarios must share one pipe diameter")
    manifest_path = directory / MANIFEST_FILE
    _write_json(manifest_path, {
        "pairs": pairs,
        "pipe_diameter_m": diameters.pop() if diameters else DEFAULT_PIPE_DIAMETER_M,
    })
    logger.debug("wrote grid scenarios=%d directory=%s", len(grid), directory)
    return manifest_path
