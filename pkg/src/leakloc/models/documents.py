from typing import List, Optional

from satya import Model, Field


class AnalysisSettings(Model):
    """Tunable analysis options; every field may be omitted"""
    threshold_s: Optional[float] = Field(required=False, ge=0.0, description="NoLeak/Leak lag threshold in seconds")
    t_buffer_s: Optional[float] = Field(required=False, description="Buffer time subtracted from measured delays")
    epsilon: Optional[float] = Field(required=False, ge=0.0, le=1.0, description="Fractional accuracy target")
    top_k: Optional[int] = Field(required=False, ge=1, le=64, description="Interference lines per axis")
    notch_bandwidth_hz: Optional[float] = Field(required=False, ge=0.0, description="Notch -3 dB bandwidth")
    estimation_window: Optional[int] = Field(required=False, ge=16, description="Spectrum window in samples")
    normalized: Optional[bool] = Field(required=False, description="Normalise correlation values")
    interpolate: Optional[bool] = Field(required=False, description="Parabolic sub-sample peak interpolation")
    max_concurrent: Optional[int] = Field(required=False, ge=1, le=64, description="Worker threads")
    min_prominence_db: Optional[float] = Field(required=False, ge=0.0, description="Line floor above median spectrum")
    debug: Optional[bool] = Field(required=False, description="Verbose logging")


class PairEntry(Model):
    """One left/right recording pair inside a run manifest"""
    left: str = Field(description="Left (sensor 2) CSV path, relative to the manifest")
    right: str = Field(description="Right (sensor 1) CSV path, relative to the manifest")
    spacing_L_m: float = Field(ge=0.0, description="Distance between the sensors in metres")
    pressure_kgfcm2: float = Field(ge=0.0, description="Water pressure label")
    flow_lpm: float = Field(ge=0.0, description="Water flow in litres per minute")
    scenario: str = Field(description="Leak or NoLeak")
    name: Optional[str] = Field(required=False, description="Label used in reports")
    per_side_m: Optional[float] = Field(required=False, ge=0.0, description="Equidistant sensor-to-leak distance")
    true_leak_from_left_m: Optional[float] = Field(required=False, ge=0.0, description="Ground-truth leak position")
    profile: Optional[str] = Field(required=False, description="Interference profile JSON path")


class RunManifestDocument(Model):
    """Experiment grid: recording pairs plus shared pipe data and options"""
    pairs: List[dict] = Field(description="PairEntry objects")
    pipe_diameter_m: float = Field(default=0.0334, ge=0.0, description="Pipe inner diameter in metres")
    calibration: Optional[str] = Field(required=False, description="Calibration JSON path")
    options: Optional[dict] = Field(required=False, description="AnalysisSettings overrides")


class FixtureManifest(Model):
    """Manifest written next to a simulated pair of sensor files"""
    scenario: str = Field(description="Leak or NoLeak")
    spacing_L_m: float = Field(ge=0.0, description="Distance between the sensors in metres")
    pressure_kgfcm2: float = Field(ge=0.0, description="Water pressure label")
    flow_lpm: float = Field(ge=0.0, description="Water flow in litres per minute")
    pipe_diameter_m: float = Field(ge=0.0, description="Pipe inner diameter in metres")
    clock_skew_s: float = Field(description="Time shift applied to sensor 2")
    rng_seed: int = Field(description="Seed the fixture was generated with")
    files: List[str] = Field(description="Left and right sensor CSV names")
    per_side_m: Optional[float] = Field(required=False, ge=0.0, description="Equidistant sensor-to-leak distance")
    leak_from_left_m: Optional[float] = Field(required=False, ge=0.0, description="Ground-truth leak position")
    ground_truth_dt_s: Optional[float] = Field(required=False, description="Injected arrival difference")
    sample_rate_hz: Optional[float] = Field(required=False, ge=0.0, description="Sampling rate")
    wave_speed_mps: Optional[float] = Field(required=False, ge=0.0, description="Propagation speed used")


class CalibrationEntry(Model):
    """t_noLeak and t_buffer for one (pressure, spacing, axis) condition"""
    pressure_kgfcm2: float = Field(ge=0.0, description="Water pressure label")
    spacing_L_m: float = Field(ge=0.0, description="Distance between the sensors in metres")
    axis: str = Field(description="x, y or z")
    t_noLeak_s: float = Field(description="No-leak baseline peak lag")
    t_buffer_s: float = Field(default=0.0, description="Buffer time")
    n_baselines: Optional[int] = Field(required=False, ge=0, description="No-leak pairs averaged")
    n_residuals: Optional[int] = Field(required=False, ge=0, description="Leak pairs used for the buffer fit")


class InterferenceProfileRef(Model):
    """Interference profile file to notch with for one (pressure, spacing) condition"""
    pressure_kgfcm2: float = Field(ge=0.0, description="Water pressure label")
    spacing_L_m: float = Field(ge=0.0, description="Distance between the sensors in metres")
    path: str = Field(description="Profile JSON path, relative to the calibration file")


class CalibrationDocument(Model):
    """Calibration file"""
    entries: List[dict] = Field(description="CalibrationEntry objects")
    interference_profiles: Optional[List[dict]] = Field(required=False, description="InterferenceProfileRef objects")


class ProfileDocument(Model):
    """Serialised interference profile"""
    source: str = Field(description="Motor, Pump, Valve or Combined")
    pressure_kgfcm2: float = Field(ge=0.0, description="Water pressure label")
    estimation_window: int = Field(ge=1, description="Spectrum window in samples")
    bins: List[dict] = Field(description="Objects with frequency_hz and magnitude")
    sample_rate_hz: Optional[float] = Field(required=False, ge=0.0, description="Rate of the baseline")


class ScenarioDocument(Model):
    """Simulator scenario; spacing comes from spacing_L_m or per_side_m"""
    spacing_L_m: Optional[float] = Field(required=False, ge=0.0, description="Distance between the sensors")
    per_side_m: Optional[float] = Field(required=False, ge=0.0, description="Equidistant sensor-to-leak distance")
    leak_from_left_m: Optional[float] = Field(required=False, description="Leak position; omit for no leak")
    wave_speed_mps: Optional[float] = Field(required=False, ge=0.0, description="Propagation speed")
    flow_lpm: Optional[float] = Field(required=False, ge=0.0, description="Flow used to derive the speed")
    pressure_kgfcm2: float = Field(default=0.0, ge=0.0, description="Water pressure label")
    pipe_diameter_m: float = Field(default=0.0334, ge=0.0, description="Pipe inner diameter")
    sample_rate_hz: float = Field(default=100.0, ge=0.0, description="Sampling rate")
    duration_s: float = Field(default=480.0, ge=0.0, description="Recording length")
    clock_skew_s: float = Field(default=0.0, description="Time shift applied to sensor 2")
    interference_tones: Optional[List[dict]] = Field(required=False, description="source/frequency_hz/amplitude_g")
    leak_bandwidth_hz: Optional[List[float]] = Field(required=False, description="[low, high] in Hz")
    leak_amplitude_g: float = Field(default=0.05, ge=0.0, description="Leak source RMS at the sensor")
    snr_db: float = Field(default=20.0, description="Signal to noise ratio per channel")
    attenuation_db_per_m: float = Field(default=0.0, ge=0.0, description="Amplitude decay with distance")
    rng_seed: int = Field(default=0, description="Random seed")


class GridDocument(Model):
    """Pressure x distance grid expanded into leak and no-leak scenarios"""
    pressures: List[float] = Field(description="Pressures looked up in the bundled flow table")
    per_side_m: List[float] = Field(description="Sensor-to-leak distances")
    leak_fraction: float = Field(default=0.5, ge=0.0, le=1.0, description="Leak position as a fraction of L")
    leak_extra_skew_s: float = Field(default=0.0, description="Extra sensor 2 shift for leak scenarios only")
    include_no_leak: bool = Field(default=True, description="Also emit the matching no-leak scenario")
