"""
Recompute the published field-trial tables from their published inputs.

Every cell is recomputed with the same functions the pipeline uses and
compared with the printed value. Cells outside tolerance are FAIL, except
cells whose printed value is known to disagree with its own inputs (or is
missing); those are DOCUMENTED-DEVIATION with a note.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

from .data import cell, distances, is_filled, load_published_tables, per_distance, pressures
from .errors import UnknownTableError
from .hydraulics import FlowMeasurement, PipeSpec, wave_speed
from .localizer import error_percent, ideal_delay_bounds, localize
from .signal_core import Axis
from .utils import render_table

logger = logging.getLogger(__name__)

WAVE_SPEED_TOLERANCE = 0.001
LEAK_DISTANCE_FLOOR_M = 0.05
LEAK_DISTANCE_RELATIVE = 0.02
ERROR_PERCENT_TOLERANCE = 1.0
IDEAL_DISTANCE_TOLERANCE_M = 0.005
IDEAL_DELAY_TOLERANCE_S = 0.015


class CellStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    DEVIATION = "DOCUMENTED-DEVIATION"


@dataclass(frozen=True)
class ReproducedCell:
    label: str
    published: Optional[float]
    recomputed: Optional[float]
    tolerance: float
    status: CellStatus
    note: str = ""

    @property
    def diff(self) -> Optional[float]:
        if self.published is None or self.recomputed is None:
            return None
        return abs(self.recomputed - self.published)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "published": self.published,
            "recomputed": self.recomputed,
            "diff": self.diff,
            "tolerance": self.tolerance,
            "status": self.status.value,
            "note": self.note,
        }


@dataclass
class TableReport:
    table_id: str
    title: str
    cells: List[ReproducedCell] = field(default_factory=list)

    def add(
        self,
        label: str,
        published: Optional[float],
        recomputed: Optional[float],
        tolerance: float,
        known_deviation: bool = False,
        note: str = "",
    ) -> ReproducedCell:
        """Score one cell; a missing value or a known-bad printed value is a deviation"""
        if published is None or recomputed is None:
            status = CellStatus.DEVIATION
            note = note or "no published value"
        elif abs(recomputed - published) <= tolerance:
            status = CellStatus.PASS
        elif known_deviation:
            status = CellStatus.DEVIATION
        else:
            status = CellStatus.FAIL
        result = ReproducedCell(label, published, recomputed, tolerance, status, note)
        self.cells.append(result)
        return result

    def count(self, status: CellStatus) -> int:
        return sum(1 for c in self.cells if c.status is status)

    @property
    def ok(self) -> bool:
        return self.count(CellStatus.FAIL) == 0

    def summary(self) -> str:
        return (
            f"{self.count(CellStatus.PASS)} pass, {self.count(CellStatus.FAIL)} fail, "
            f"{self.count(CellStatus.DEVIATION)} documented deviations"
        )

    def render(self, decimals: int = 4) -> str:
        rows = [
            [c.label, c.published, c.recomputed, c.diff, c.tolerance, c.status.value, c.note]
            for c in self.cells
        ]
        headers = ["cell", "published", "recomputed", "|diff|", "tol", "status", "note"]
        return "\n".join([
            f"Table {self.table_id}: {self.title}",
            render_table(headers, rows, decimals=decimals),
            self.summary(),
        ])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "table": self.table_id,
            "title": self.title,
            "ok": self.ok,
            "counts": {s.value: self.count(s) for s in CellStatus},
            "cells": [c.to_dict() for c in self.cells],
        }


def _pipe() -> PipeSpec:
    return PipeSpec(load_published_tables()["pipe_diameter_m"])


def _speeds() -> Dict[float, float]:
    """Recomputed wave speed per pressure"""
    spec = _pipe()
    return {
        row["pressure_kgfcm2"]: wave_speed(FlowMeasurement(row["flow_lpm"], row["pressure_kgfcm2"]), spec)
        for row in load_published_tables()["wave_speed"]
    }


def reproduce_wave_speed(epsilon: Optional[float] = None) -> TableReport:
    report = TableReport("1", "wave speed from measured flow")
    spec = _pipe()
    for row in load_published_tables()["wave_speed"]:
        c = wave_speed(FlowMeasurement(row["flow_lpm"], row["pressure_kgfcm2"]), spec)
        report.add(
            f"{row['pressure_kgfcm2']} kgf/cm2, {row['flow_lpm']:.2f} lpm",
            row["wave_speed_mps"], c, WAVE_SPEED_TOLERANCE,
            known_deviation="note" in row, note=row.get("note", ""),
        )
    return report


def _is_consistent(pressure: float, distance: float, axis: Axis) -> bool:
    for entry in load_published_tables()["leak_distance"]["consistent"]:
        if (
            abs(entry["pressure_kgfcm2"] - pressure) < 1e-9
            and abs(entry["distance_m"] - distance) < 1e-9
            and entry["axis"] == axis.value
        ):
            return True
    return False


def reproduce_leak_distance(epsilon: Optional[float] = None) -> TableReport:
    """
    Leak distances from measured leak delays and recomputed wave speeds with
    L = 2 x sensor distance, then error percentages from the printed
    distances. Only the consistent subset can FAIL; the other cells are
    deviations when they disagree.
    """
    tables = load_published_tables()
    delays = tables["measured_delays_s"]["leak"]
    printed = tables["leak_distance"]["distance_m"]
    printed_error = tables["leak_distance"]["error_percent"]
    report = TableReport("4", "leak distance from measured leak delays")
    speeds = _speeds()

    for pressure in pressures():
        for distance in distances():
            for axis in Axis:
                label = f"{pressure} kgf/cm2, {distance} m, {axis.value}"
                consistent = _is_consistent(pressure, distance, axis)
                note = "" if consistent else "printed value inconsistent with its delay"
                if cell(printed, pressure, distance, axis) is None:
                    note = "no published value"
                d_l = localize(2.0 * distance, speeds[pressure], cell(delays, pressure, distance, axis)).d_l_m
                published = cell(printed, pressure, distance, axis)
                tolerance = max(LEAK_DISTANCE_FLOOR_M, LEAK_DISTANCE_RELATIVE * abs(published or 0.0))
                report.add(f"{label} distance", published, d_l, tolerance,
                           known_deviation=not consistent, note=note)

                published_error = cell(printed_error, pressure, distance, axis)
                recomputed = error_percent(distance, published) if published is not None else None
                report.add(f"{label} error %", published_error, recomputed, ERROR_PERCENT_TOLERANCE,
                           known_deviation=not consistent,
                           note="" if published is not None else "printed distance missing")
    return report


def reproduce_ideal_distance(epsilon: Optional[float] = None) -> TableReport:
    tables = load_published_tables()
    epsilon = tables["epsilon"] if epsilon is None else epsilon
    c = next(iter(_speeds().values()))  # distances do not depend on c
    report = TableReport("5", f"ideal leak distance at {epsilon:.1%} accuracy")
    for row in tables["ideal_distance"]:
        bounds = ideal_delay_bounds(row["distance_m"], c, epsilon)
        report.add(f"{row['distance_m']} m min", row["d_min_m"], bounds.d_min_m, IDEAL_DISTANCE_TOLERANCE_M)
        report.add(f"{row['distance_m']} m max", row["d_max_m"], bounds.d_max_m, IDEAL_DISTANCE_TOLERANCE_M)
    return report


def reproduce_ideal_delay(epsilon: Optional[float] = None) -> TableReport:
    """
    Ideal delays and the raw lags that produce them, using the published
    t_noLeak row. The published no-leak delays are checked against that row
    as well; where they disagree the cell is a deviation.
    """
    tables = load_published_tables()
    epsilon = tables["epsilon"] if epsilon is None else epsilon
    ideal = tables["ideal_delay"]
    no_leak = tables["measured_delays_s"]["no_leak"]
    speeds = _speeds()
    report = TableReport("6", f"ideal delay and raw lag at {epsilon:.1%} accuracy")

    for pressure in pressures():
        for distance in distances():
            label = f"{pressure} kgf/cm2, {distance} m"
            t_noLeak = per_distance(ideal["t_noLeak_s"], pressure, distance)
            bounds = ideal_delay_bounds(distance, speeds[pressure], epsilon, t_noLeak)
            report.add(f"{label} dt min", per_distance(ideal["dt_min_s"], pressure, distance),
                       bounds.dt_min_s, IDEAL_DELAY_TOLERANCE_S)
            report.add(f"{label} dt max", per_distance(ideal["dt_max_s"], pressure, distance),
                       bounds.dt_max_s, IDEAL_DELAY_TOLERANCE_S)
            report.add(f"{label} t_actual min", per_distance(ideal["t_actual_min_s"], pressure, distance),
                       bounds.t_actual_min_s, IDEAL_DELAY_TOLERANCE_S)
            report.add(f"{label} t_actual max", per_distance(ideal["t_actual_max_s"], pressure, distance),
                       bounds.t_actual_max_s, IDEAL_DELAY_TOLERANCE_S)

            measured = cell(no_leak, pressure, distance, Axis.X)
            note = "measured no-leak delay filled in" if is_filled("no_leak", pressure, distance, Axis.Z) else ""
            if abs(measured - t_noLeak) > 1e-9:
                note = "measured no-leak delay differs from the t_noLeak used here"
            report.add(f"{label} t_noLeak vs measured", t_noLeak, measured, 0.0,
                       known_deviation=True, note=note)
    return report


REPRODUCERS: Dict[str, Callable[[Optional[float]], TableReport]] = {
    "1": reproduce_wave_speed,
    "4": reproduce_leak_distance,
    "5": reproduce_ideal_distance,
    "6": reproduce_ideal_delay,
}


def reproduce(table_id: str, epsilon: Optional[float] = None) -> List[TableReport]:
    """
    Reproduce one table ("1", "4", "5", "6") or all of them ("all").

    Raises:
        UnknownTableError: any other id
    """
    table_id = str(table_id).strip().lower()
    if table_id == "all":
        ids = list(REPRODUCERS)
    elif table_id in REPRODUCERS:
        ids = [table_id]
    else:
        raise UnknownTableError(f"unknown table {table_id!r}; expected one of {', '.join(REPRODUCERS)} or all")
    reports = [REPRODUCERS[i](epsilon) for i in ids]
    for report in reports:
        logger.debug("reproduced table=%s %s", report.table_id, report.summary())
    return reports
