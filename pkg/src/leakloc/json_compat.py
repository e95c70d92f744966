"""Lightweight JSON compatibility layer.

Uses orjson if available for performance, otherwise falls back to stdlib json.

Functions:
- loads: parse JSON string -> Python object
- dumps: serialize Python object -> JSON string
- JSONDecodeError: exception type raised on parse errors
"""

from typing import Any

import numpy as np

try:  # Prefer orjson for speed
    import orjson as _json  # type: ignore
    _USING_ORJSON = True
except Exception:  # Fallback to stdlib
    import json as _json  # type: ignore
    _USING_ORJSON = False


try:
    JSONDecodeError = _json.JSONDecodeError  # type: ignore[attr-defined]
except Exception:  # pragma: no cover - extremely unlikely
    JSONDecodeError = ValueError  # type: ignore


def _default(obj: Any) -> Any:
    # numpy scalars and arrays leak out of the numeric code
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):  # Enum members
        return obj.value
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def loads(s: str) -> Any:
    return _json.loads(s)


def dumps(obj: Any, indent: bool = False, sort_keys: bool = False) -> str:
    if _USING_ORJSON:
        option = 0
        if indent:
            option |= _json.OPT_INDENT_2
        if sort_keys:
            option |= _json.OPT_SORT_KEYS
        # orjson.dumps returns bytes; stdlib returns str
        return _json.dumps(obj, default=_default, option=option).decode("utf-8")
    return _json.dumps(
        obj,
        default=_default,
        indent=2 if indent else None,
        sort_keys=sort_keys,
        allow_nan=False,
    )
