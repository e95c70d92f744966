"""
Published field-trial tables bundled with leakloc.

Three water pressures, four sensor distances and three axes. Table cells are
stored as ``{pressure: [[x, y, z] per distance]}`` with pressures keyed by
their decimal string ("0.6", "1.0", "1.4").
"""

from functools import lru_cache
from importlib import resources
from typing import Any, Dict, List, Optional

from ..errors import InvalidConfigError
from ..json_compat import loads as json_loads
from ..signal_core import Axis

PUBLISHED_TABLES = "published_tables.json"


@lru_cache(maxsize=None)
def load_published_tables() -> Dict[str, Any]:
    text = resources.files(__name__).joinpath(PUBLISHED_TABLES).read_text(encoding="utf-8")
    return json_loads(text)


def pressure_key(pressure_kgfcm2: float) -> str:
    return f"{float(pressure_kgfcm2):.1f}"


def pressures() -> List[float]:
    return list(load_published_tables()["pressures_kgfcm2"])


def distances() -> List[float]:
    return list(load_published_tables()["distances_m"])


def flow_for_pressure(pressure_kgfcm2: float) -> float:
    """Measured flow (lpm) at a published pressure"""
    for row in load_published_tables()["wave_speed"]:
        if abs(row["pressure_kgfcm2"] - pressure_kgfcm2) < 1e-9:
            return float(row["flow_lpm"])
    known = ", ".join(str(p) for p in pressures())
    raise InvalidConfigError(f"no published flow for pressure {pressure_kgfcm2}; known pressures: {known}")


def cell(grid: Dict[str, List[List[Optional[float]]]], pressure_kgfcm2: float,
         distance_m: float, axis) -> Optional[float]:
    """Look up one (pressure, distance, axis) cell of a stored table"""
    row = grid[pressure_key(pressure_kgfcm2)]
    return row[distances().index(distance_m)][Axis.parse(axis).index]


def per_distance(grid: Dict[str, List[float]], pressure_kgfcm2: float, distance_m: float) -> float:
    return grid[pressure_key(pressure_kgfcm2)][distances().index(distance_m)]


def is_filled(kind: str, pressure_kgfcm2: float, distance_m: float, axis) -> bool:
    """True for the measured-delay cells that were blank in the published table"""
    axis = Axis.parse(axis)
    for entry in load_published_tables()["measured_delays_s"]["filled"]:
        if (
            entry["kind"] == kind
            and abs(entry["pressure_kgfcm2"] - pressure_kgfcm2) < 1e-9
            and abs(entry["distance_m"] - distance_m) < 1e-9
            and entry["axis"] == axis.value
        ):
            return True
    return False


__all__ = [
    "load_published_tables",
    "pressure_key",
    "pressures",
    "distances",
    "flow_for_pressure",
    "cell",
    "per_distance",
    "is_filled",
]
