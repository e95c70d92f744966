import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Sequence, TypeVar

T = TypeVar('T')
R = TypeVar('R')

LOGGER_NAME = "leakloc"


def debug_from_env() -> bool:
    """True when LEAKLOC_DEBUG=1 is set in the environment"""
    return os.environ.get("LEAKLOC_DEBUG", "0") == "1"


def configure_logging(debug: bool = False, stream=None) -> logging.Logger:
    """
    Attach a stderr handler to the package logger.

    Library modules only create loggers; the command line calls this once.
    Calling it again replaces the handler instead of stacking a second one.
    """
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if getattr(handler, "_leakloc_handler", False):
            logger.removeHandler(handler)

    handler = logging.StreamHandler(stream or sys.stderr)
    handler._leakloc_handler = True  # type: ignore[attr-defined]
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if (debug or debug_from_env()) else logging.WARNING)
    return logger


def run_ordered(
    func: Callable[[T], R],
    items: Iterable[T],
    max_concurrent: int = 1,
) -> List[R]:
    """
    Apply func to every item, optionally on a thread pool.

    Results always come back in input order, whatever order the workers
    finish in.
    """
    items = list(items)
    if max_concurrent <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(max_concurrent, len(items))) as executor:
        return list(executor.map(func, items))


def format_number(value: Any, decimals: int = 2) -> str:
    """Fixed-decimal rendering for tables; None and NaN render as '-'"""
    if value is None:
        return "-"
    if isinstance(value, float) and value != value:
        return "-"
    if isinstance(value, (int, float)):
        return f"{value:.{decimals}f}"
    return str(value)


def format_significant(value: float, digits: int = 4) -> str:
    """Render value with a fixed number of significant digits"""
    return f"{value:.{digits}g}"


def render_table(headers: Sequence[str], rows: Sequence[Sequence[Any]], decimals: int = 2) -> str:
    """
    Render rows as a plain-text table with right-aligned numeric columns.
    """
    cells = [[format_number(value, decimals) for value in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def _line(values: Sequence[str], numeric: Sequence[bool]) -> str:
        parts = []
        for i, value in enumerate(values):
            parts.append(value.rjust(widths[i]) if numeric[i] else value.ljust(widths[i]))
        return "  ".join(parts).rstrip()

    numeric_cols = [
        all(isinstance(row[i], (int, float)) or row[i] is None for row in rows) if rows else False
        for i in range(len(headers))
    ]
    lines = [_line(list(headers), [False] * len(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append(_line(row, numeric_cols))
    return "\n".join(lines)
