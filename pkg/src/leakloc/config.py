"""
Analysis configuration.

AnalysisConfig holds every tunable the pipeline reads. Files may be JSON or
line-oriented ``key = value``; both go through the same satya schema.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union
import logging

from .errors import InvalidConfigError, SchemaError
from .json_compat import loads as json_loads, JSONDecodeError
from .models import AnalysisSettings, validate_document
from .utils import debug_from_env

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_S = 0.5
DEFAULT_EPSILON = 0.029
DEFAULT_TOP_K = 5
DEFAULT_NOTCH_BANDWIDTH_HZ = 2.0
DEFAULT_ESTIMATION_WINDOW = 1024


@dataclass(frozen=True)
class AnalysisConfig:
    """Options shared by the filter, correlation and localisation stages"""
    threshold_s: float = DEFAULT_THRESHOLD_S
    t_buffer_s: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    top_k: int = DEFAULT_TOP_K
    notch_bandwidth_hz: float = DEFAULT_NOTCH_BANDWIDTH_HZ
    estimation_window: int = DEFAULT_ESTIMATION_WINDOW
    normalized: bool = True
    interpolate: bool = False
    max_concurrent: int = 3
    min_prominence_db: float = 6.0
    debug: bool = False

    def __post_init__(self):
        if not self.threshold_s > 0:
            raise InvalidConfigError(f"threshold_s must be positive, got {self.threshold_s}")
        if not 0 < self.epsilon < 1:
            raise InvalidConfigError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.top_k < 1:
            raise InvalidConfigError(f"top_k must be at least 1, got {self.top_k}")
        if not self.notch_bandwidth_hz > 0:
            raise InvalidConfigError(f"notch_bandwidth_hz must be positive, got {self.notch_bandwidth_hz}")
        if self.estimation_window < 16:
            raise InvalidConfigError(f"estimation_window must be at least 16, got {self.estimation_window}")
        if self.max_concurrent < 1:
            raise InvalidConfigError(f"max_concurrent must be at least 1, got {self.max_concurrent}")
        if not self.debug and debug_from_env():
            object.__setattr__(self, "debug", True)

    def merged(self, overrides: Optional[Dict[str, Any]] = None, **kwargs) -> "AnalysisConfig":
        """Return a copy with every non-None override applied"""
        values = dict(overrides or {})
        values.update(kwargs)
        known = {f.name for f in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidConfigError(f"unknown analysis option(s): {', '.join(unknown)}")
        return replace(self, **{k: v for k, v in values.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _decode_value(raw: str) -> Any:
    raw = raw.strip()
    try:
        return json_loads(raw)
    except (JSONDecodeError, ValueError):
        return raw


def parse_key_values(text: str) -> Dict[str, Any]:
    """
    Parse ``key = value`` lines.

    Blank lines and ``#`` comments are skipped. Values are decoded as JSON when
    possible (numbers, booleans, lists, objects), otherwise kept as strings.
    """
    data: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise SchemaError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise SchemaError(f"line {lineno}: empty key")
        data[key] = _decode_value(value)
    return data


def parse_config_text(text: str) -> Dict[str, Any]:
    """Decode a config document, JSON object or key=value lines"""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json_loads(stripped)
        except (JSONDecodeError, ValueError) as e:
            raise SchemaError(f"invalid JSON config: {e}") from e
        if not isinstance(data, dict):
            raise SchemaError("JSON config must be an object")
        return data
    return parse_key_values(text)


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read and decode a config file without validating it"""
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def settings_to_overrides(data: Dict[str, Any], source: str = "config") -> Dict[str, Any]:
    """Validate analysis options and return the fields that were set"""
    settings = validate_document(AnalysisSettings, data, source=source)
    known = {f.name for f in fields(AnalysisConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise SchemaError(f"{source}: unknown analysis option(s): {', '.join(unknown)}")
    return {name: getattr(settings, name, None) for name in data}


def load_config(path: Optional[Union[str, Path]] = None, base: Optional[AnalysisConfig] = None) -> AnalysisConfig:
    """Build an AnalysisConfig from defaults and an optional file"""
    config = base or AnalysisConfig()
    if path is None:
        return config
    overrides = settings_to_overrides(read_config_file(path), source=str(path))
    logger.debug("loaded config path=%s keys=%s", path, sorted(overrides))
    return config.merged(overrides)
