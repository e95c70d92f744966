__version__ = "0.1.0"

# Recordings and pairing
from .signal_core import (
    Axis,
    Scenario,
    Side,
    TriAxialSeries,
    RecordingMeta,
    SensorRecording,
    DeploymentGeometry,
    RecordingPair,
    parse_recording,
    read_recording,
    format_recording,
    write_recording,
    align_series,
    align_pair,
)

# Configuration
from .config import AnalysisConfig, load_config

# Hydraulics
from .hydraulics import PipeSpec, FlowMeasurement, pipe_area, wave_speed, flow_for_speed

# Interference removal
from .interference import (
    InterferenceSource,
    InterferenceProfile,
    estimate_profile,
    filter_series,
    save_profile,
    load_profile,
)

# Cross-correlation
from .xcorr import (
    CorrelationFunction,
    DelayEstimate,
    cross_correlate,
    find_peak,
    classify,
    estimate_delay,
    correlate_axes,
    export_correlation,
    read_correlation,
)

# Localisation and calibration
from .localizer import (
    LocalizationResult,
    CalibrationProfile,
    CalibrationTable,
    IdealDelayBounds,
    localize,
    delay_for,
    error_percent,
    corrected_delay,
    t_actual,
    ideal_delay_bounds,
    measured_delays,
    baseline_lag,
    localize_pair,
    fit_buffer,
    build_calibration,
)

# Simulation and table reproduction
from .simulator import InterferenceTone, ScenarioConfig, SimulatedScenario, simulate, scenario_grid, load_fixture
from .reproduce import CellStatus, TableReport, reproduce

from .errors import (
    LeakLocError,
    RecordingError,
    MalformedRowError,
    NonUniformSamplingError,
    EmptyFileError,
    RateMismatchError,
    NoOverlapError,
    PairMismatchError,
    FilterError,
    TooShortError,
    NyquistViolationError,
    CorrelationError,
    LengthMismatchError,
    DegenerateInputError,
    GeometryError,
    InvalidGeometryError,
    ZeroActualError,
    InvalidEpsilonError,
    MissingBaselineError,
    InvalidConfigError,
    SchemaError,
    UnknownTableError,
    UsageError,
)

__all__ = [
    '__version__',

    # Recordings
    'Axis',
    'Scenario',
    'Side',
    'TriAxialSeries',
    'RecordingMeta',
    'SensorRecording',
    'DeploymentGeometry',
    'RecordingPair',
    'parse_recording',
    'read_recording',
    'format_recording',
    'write_recording',
    'align_series',
    'align_pair',

    'AnalysisConfig',
    'load_config',

    'PipeSpec',
    'FlowMeasurement',
    'pipe_area',
    'wave_speed',
    'flow_for_speed',

    # Interference
    'InterferenceSource',
    'InterferenceProfile',
    'estimate_profile',
    'filter_series',
    'save_profile',
    'load_profile',

    # Correlation
    'CorrelationFunction',
    'DelayEstimate',
    'cross_correlate',
    'find_peak',
    'classify',
    'estimate_delay',
    'correlate_axes',
    'export_correlation',
    'read_correlation',

    # Localisation
    'LocalizationResult',
    'CalibrationProfile',
    'CalibrationTable',
    'IdealDelayBounds',
    'localize',
    'delay_for',
    'error_percent',
    'corrected_delay',
    't_actual',
    'ideal_delay_bounds',
    'measured_delays',
    'baseline_lag',
    'localize_pair',
    'fit_buffer',
    'build_calibration',

    'InterferenceTone',
    'ScenarioConfig',
    'SimulatedScenario',
    'simulate',
    'scenario_grid',
    'load_fixture',
    'CellStatus',
    'TableReport',
    'reproduce',

    # Errors
    'LeakLocError',
    'RecordingError',
    'MalformedRowError',
    'NonUniformSamplingError',
    'EmptyFileError',
    'RateMismatchError',
    'NoOverlapError',
    'PairMismatchError',
    'FilterError',
    'TooShortError',
    'NyquistViolationError',
    'CorrelationError',
    'LengthMismatchError',
    'DegenerateInputError',
    'GeometryError',
    'InvalidGeometryError',
    'ZeroActualError',
    'InvalidEpsilonError',
    'MissingBaselineError',
    'InvalidConfigError',
    'SchemaError',
    'UnknownTableError',
    'UsageError',
]
