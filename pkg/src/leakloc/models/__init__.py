"""
Satya schemas for every JSON document leakloc reads.

validate_document() is the single entry point: it normalises JSON integers
for float fields and turns satya failures into SchemaError.
"""

import typing
from typing import Any, Dict, Type, TypeVar

import satya
from satya import Model as SatyaModel

from ..errors import SchemaError

M = TypeVar('M', bound=SatyaModel)

# satya has moved its validation errors around between releases and some
# versions export a ValidationError that is not an exception class.
_SATYA_ERRORS = tuple(
    klass
    for klass in (getattr(satya, name, None) for name in ("ModelValidationError", "ValidationError"))
    if isinstance(klass, type) and issubclass(klass, BaseException)
)
VALIDATION_ERRORS = _SATYA_ERRORS + (ValueError, TypeError)


def _float_fields(model_class: Type[SatyaModel]) -> Dict[str, bool]:
    """Map float-typed field names to whether they hold a list of floats"""
    annotations: Dict[str, Any] = {}
    for klass in reversed(model_class.__mro__):
        if klass is SatyaModel or not issubclass(klass, SatyaModel):
            continue
        annotations.update(vars(klass).get("__annotations__", {}))

    fields = {}
    for name, annotation in annotations.items():
        args = typing.get_args(annotation)
        if annotation is float or (float in args and type(None) in args):
            fields[name] = False
        elif typing.get_origin(annotation) in (list, typing.List) and args == (float,):
            fields[name] = True
    return fields


def _coerce_numbers(model_class: Type[SatyaModel], data: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(data)
    for name, is_list in _float_fields(model_class).items():
        value = out.get(name)
        if is_list and isinstance(value, list):
            out[name] = [float(v) if isinstance(v, int) and not isinstance(v, bool) else v for v in value]
        elif isinstance(value, int) and not isinstance(value, bool):
            out[name] = float(value)
    return out


def validate_document(model_class: Type[M], data: Any, source: str = "document") -> M:
    """Validate a decoded JSON object against a satya model"""
    if not isinstance(data, dict):
        raise SchemaError(f"{source}: expected a JSON object, got {type(data).__name__}")
    data = _coerce_numbers(model_class, data)
    try:
        if hasattr(model_class, 'model_validate'):
            return model_class.model_validate(data)
        return model_class(**data)
    except VALIDATION_ERRORS as e:
        raise SchemaError(f"{source}: {model_class.__name__} validation failed: {e}") from e


from .documents import (  # noqa: E402
    AnalysisSettings,
    CalibrationDocument,
    CalibrationEntry,
    FixtureManifest,
    GridDocument,
    InterferenceProfileRef,
    PairEntry,
    ProfileDocument,
    RunManifestDocument,
    ScenarioDocument,
)

__all__ = [
    'validate_document',
    'VALIDATION_ERRORS',
    'AnalysisSettings',
    'CalibrationDocument',
    'CalibrationEntry',
    'FixtureManifest',
    'GridDocument',
    'InterferenceProfileRef',
    'PairEntry',
    'ProfileDocument',
    'RunManifestDocument',
    'ScenarioDocument',
]
