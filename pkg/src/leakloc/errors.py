"""Exception hierarchy for leakloc.

Every error the toolkit raises derives from :class:`LeakLocError`. Errors that
describe a bad value also derive from :class:`ValueError`.
"""


class LeakLocError(Exception):
    """Base exception for leakloc errors"""
    pass


# Recordings and pairing

class RecordingError(LeakLocError, ValueError):
    """Raised when a sensor recording cannot be built or paired"""
    pass


class MalformedRowError(RecordingError):
    """Raised when a CSV row is non-numeric, non-finite or has the wrong arity"""

    def __init__(self, message: str, line: int = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonUniformSamplingError(RecordingError):
    """Raised when timestamps are not uniformly spaced"""
    pass


class EmptyFileError(RecordingError):
    """Raised when a recording has no data rows"""
    pass


class RateMismatchError(RecordingError):
    """Raised when two series have different sample rates"""
    pass


class NoOverlapError(RecordingError):
    """Raised when two series share no time window"""
    pass


class PairMismatchError(RecordingError):
    """Raised when two recordings do not form a valid left/right pair"""
    pass


# Interference filtering

class FilterError(LeakLocError, ValueError):
    """Base exception for interference filtering"""
    pass


class TooShortError(FilterError):
    """Raised when a baseline is shorter than the estimation window"""
    pass


class NyquistViolationError(FilterError):
    """Raised when a notch frequency is at or above the Nyquist frequency"""
    pass


# Correlation

class CorrelationError(LeakLocError, ValueError):
    """Base exception for correlation errors"""
    pass


class LengthMismatchError(CorrelationError):
    """Raised when the two correlation inputs differ in length or are too short"""
    pass


class DegenerateInputError(CorrelationError):
    """Raised when a zero-variance signal is normalised"""
    pass


# Localisation

class GeometryError(LeakLocError, ValueError):
    """Base exception for localisation arithmetic"""
    pass


class InvalidGeometryError(GeometryError):
    """Raised for non-positive spacing or wave speed"""
    pass


class ZeroActualError(GeometryError):
    """Raised when an error percentage is requested against a zero distance"""
    pass


class InvalidEpsilonError(GeometryError):
    """Raised when the accuracy fraction is outside (0, 1)"""
    pass


class MissingBaselineError(LeakLocError):
    """Raised when a leak condition has no matching no-leak baseline"""
    pass


# Configuration and documents

class InvalidConfigError(LeakLocError, ValueError):
    """Raised when a scenario or analysis configuration is invalid"""
    pass


class SchemaError(LeakLocError, ValueError):
    """Raised when a JSON document fails schema validation"""
    pass


class UnknownTableError(LeakLocError, ValueError):
    """Raised when a table id has no reproduction"""
    pass


class UsageError(LeakLocError):
    """Raised for invalid command-line usage"""
    pass
