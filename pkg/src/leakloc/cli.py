"""
leakloc command line.

    leakloc speed --flow 14.6 --diameter 0.0334
    leakloc xcorr left.csv right.csv --axis all --output plots/
    leakloc simulate grid.json --output fixtures/ --seed 42
    leakloc calibrate fixtures/manifest.json --output cal/
    leakloc localize fixtures/manifest.json --calibration cal/calibration.json
    leakloc reproduce --table all

Exit codes: 0 ran to completion, 1 usage, schema or configuration error,
2 I/O error. Leaks found are data, not failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import AnalysisConfig, load_config, read_config_file, settings_to_overrides
from .errors import LeakLocError, MissingBaselineError, SchemaError, TooShortError, UsageError
from .hydraulics import DEFAULT_PIPE_DIAMETER_M, FlowMeasurement, PipeSpec, pipe_area, wave_speed
from .interference import InterferenceProfile, estimate_profile, filter_series, load_profile, save_profile
from .json_compat import dumps as json_dumps, loads as json_loads
from .localizer import (
    CalibrationProfile,
    CalibrationTable,
    build_calibration,
    condition_key,
    ideal_delay_bounds,
    localize_pair,
)
from .models import PairEntry, RunManifestDocument, validate_document
from .reproduce import reproduce
from .signal_core import (
    Axis,
    DeploymentGeometry,
    RecordingMeta,
    RecordingPair,
    Scenario,
    Side,
    align_pair,
    align_series,
    read_recording,
)
from .simulator import config_from_document, grid_from_document, write_grid
from .utils import configure_logging, format_significant, render_table, run_ordered
from .xcorr import classify, correlate_axes, export_correlation, find_peak

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2

CALIBRATION_FILE = "calibration.json"


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors become UsageError (exit code 1)"""

    def error(self, message):
        raise UsageError(message)


def _common_options() -> argparse.ArgumentParser:
    # Defaults are suppressed so a flag given before or after the
    # subcommand lands in the same namespace without clobbering.
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", help="Print machine-readable JSON")
    common.add_argument("--output", metavar="DIR", help="Directory for written files")
    common.add_argument("--seed", type=int, metavar="N", help="Random seed for simulate")
    common.add_argument("--threshold", type=float, metavar="S", help="NoLeak/Leak lag threshold (s)")
    common.add_argument("--buffer", type=float, metavar="S", help="Buffer time t_buffer (s)")
    common.add_argument("--epsilon", type=float, metavar="E", help="Fractional accuracy target")
    common.add_argument("--config", metavar="PATH", help="Analysis config (JSON or key = value)")
    common.add_argument("--debug", action="store_true", help="Verbose logging")
    common.add_argument("--top-k", type=int, dest="top_k", metavar="K", help="Interference lines per axis")
    common.add_argument("--notch-bandwidth", type=float, dest="notch_bandwidth", metavar="HZ",
                        help="Notch -3 dB bandwidth")
    common.add_argument("--max-concurrent", type=int, dest="max_concurrent", metavar="N",
                        help="Worker threads")
    common.add_argument("--interpolate", action="store_true", help="Sub-sample peak interpolation")
    common.add_argument("--calibration", metavar="PATH", help="Calibration JSON")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="leakloc", description="Pipeline leak localisation from paired vibration recordings",
                     parents=[common])
    parser.add_argument("--version", action="version", version=f"leakloc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("speed", parents=[common], help="Wave speed from flow and pipe diameter")
    p.add_argument("--flow", type=float, required=True, metavar="LPM", help="Water flow in litres per minute")
    p.add_argument("--diameter", type=float, default=DEFAULT_PIPE_DIAMETER_M, metavar="M",
                   help="Pipe inner diameter in metres")
    p.set_defaults(handler=cmd_speed)

    p = sub.add_parser("xcorr", parents=[common], help="Correlate two sensor files")
    p.add_argument("left", help="Left sensor (sensor 2) CSV")
    p.add_argument("right", help="Right sensor (sensor 1) CSV")
    p.add_argument("--axis", default="all", choices=["x", "y", "z", "all"])
    p.add_argument("--profile", metavar="PATH", help="Interference profile to notch out first")
    p.add_argument("--rate", type=float, metavar="HZ", help="Sample rate for single-row files")
    p.add_argument("--per-side", type=float, dest="per_side", metavar="M",
                   help="Sensor-to-leak distance; with --flow, report the ideal lag window")
    p.add_argument("--flow", type=float, metavar="LPM", help="Water flow in litres per minute")
    p.add_argument("--pressure", type=float, metavar="KGFCM2",
                   help="Pressure label used to look up --calibration")
    p.add_argument("--diameter", type=float, default=DEFAULT_PIPE_DIAMETER_M, metavar="M",
                   help="Pipe inner diameter in metres")
    p.set_defaults(handler=cmd_xcorr)

    p = sub.add_parser("localize", parents=[common], help="Localise every pair of a run manifest")
    p.add_argument("manifest", help="Run manifest JSON")
    p.set_defaults(handler=cmd_localize)

    p = sub.add_parser("calibrate", parents=[common], help="Fit t_noLeak and t_buffer from a run manifest")
    p.add_argument("manifest", help="Run manifest JSON with no-leak (and optionally known-leak) pairs")
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("simulate", parents=[common], help="Write simulated fixtures")
    p.add_argument("scenario", help="Scenario or grid JSON")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("reproduce", parents=[common], help="Recompute the published tables")
    p.add_argument("--table", default="all", help="1, 4, 5, 6 or all")
    p.set_defaults(handler=cmd_reproduce)
    return parser


# ---------------------------------------------------------------------------
# Helpers

def _opt(args: argparse.Namespace, name: str, default: Any = None) -> Any:
    return getattr(args, name, default)


def analysis_config(args: argparse.Namespace, manifest_options: Optional[Dict[str, Any]] = None) -> AnalysisConfig:
    """defaults < --config file < manifest options < command-line flags"""
    config = load_config(_opt(args, "config"))
    if manifest_options:
        config = config.merged(settings_to_overrides(manifest_options, source="manifest options"))
    return config.merged({
        "threshold_s": _opt(args, "threshold"),
        "t_buffer_s": _opt(args, "buffer"),
        "epsilon": _opt(args, "epsilon"),
        "top_k": _opt(args, "top_k"),
        "notch_bandwidth_hz": _opt(args, "notch_bandwidth"),
        "max_concurrent": _opt(args, "max_concurrent"),
        "interpolate": True if _opt(args, "interpolate") else None,
        "debug": True if _opt(args, "debug") else None,
    })


def _emit(args: argparse.Namespace, payload: Any, text: str) -> None:
    if _opt(args, "json"):
        print(json_dumps(payload, indent=True, sort_keys=True))
    else:
        print(text)


def _output_dir(args: argparse.Namespace, required: bool = False) -> Optional[Path]:
    output = _opt(args, "output")
    if output is None:
        if required:
            raise UsageError(f"{args.command} needs --output DIR")
        return None
    path = Path(output)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: Any) -> Path:
    path.write_text(json_dumps(payload, indent=True, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Run manifests

class RunManifest:
    """A validated run manifest with paths resolved against its directory"""

    def __init__(self, path: Path, document: RunManifestDocument, pairs: List[PairEntry],
                 options: Optional[Dict[str, Any]]):
        self.path = path
        self.document = document
        self.pairs = pairs
        self.options = options
        self.base_dir = path.parent

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        path = Path(path)
        try:
            data = json_loads(path.read_text(encoding="utf-8"))
        except ValueError as e:
            raise SchemaError(f"{path}: invalid JSON: {e}") from e
        document = validate_document(RunManifestDocument, data, source=str(path))
        pairs = [
            validate_document(PairEntry, entry, source=f"{path} pair {i}")
            for i, entry in enumerate(document.pairs)
        ]
        manifest = cls(path, document, pairs, getattr(document, "options", None))
        manifest.check_files()
        return manifest

    def resolve(self, relative: str) -> Path:
        candidate = Path(relative)
        return candidate if candidate.is_absolute() else self.base_dir / candidate

    def check_files(self) -> None:
        for i, entry in enumerate(self.pairs):
            names = [entry.left, entry.right] + ([entry.profile] if getattr(entry, "profile", None) else [])
            for name in names:
                if not self.resolve(name).is_file():
                    raise SchemaError(f"{self.path} pair {i}: referenced file {name!r} does not exist")

    @property
    def pipe(self) -> PipeSpec:
        return PipeSpec(self.document.pipe_diameter_m)

    @property
    def calibration_path(self) -> Optional[Path]:
        name = getattr(self.document, "calibration", None)
        return self.resolve(name) if name else None


def _entry_name(entry: PairEntry, index: int) -> str:
    return getattr(entry, "name", None) or f"pair{index}"


def _load_pair(manifest: RunManifest, entry: PairEntry) -> RecordingPair:
    labels = dict(scenario=entry.scenario, pressure_kgfcm2=entry.pressure_kgfcm2, flow_lpm=entry.flow_lpm)
    left = read_recording(manifest.resolve(entry.left), RecordingMeta("sensor2", Side.LEFT, **labels))
    right = read_recording(manifest.resolve(entry.right), RecordingMeta("sensor1", Side.RIGHT, **labels))
    geometry = DeploymentGeometry(
        entry.spacing_L_m,
        getattr(entry, "per_side_m", None),
        getattr(entry, "true_leak_from_left_m", None),
    )
    return align_pair(left, right, geometry)


def _entry_profile(manifest: RunManifest, entry: PairEntry) -> Optional[InterferenceProfile]:
    name = getattr(entry, "profile", None)
    return load_profile(manifest.resolve(name)) if name else None


def _load_calibration(path) -> CalibrationTable:
    table = CalibrationTable.load(path)
    for profile_path in table.interference_profile_paths():
        if not profile_path.is_file():
            raise SchemaError(f"{path}: referenced interference profile {str(profile_path)!r} does not exist")
    return table


def _pair_profile_path(manifest: RunManifest, entry: PairEntry, table: Optional[CalibrationTable],
                       pair: RecordingPair) -> Optional[Path]:
    """A pair's own profile wins; otherwise the one calibrated for its condition"""
    name = getattr(entry, "profile", None)
    if name:
        return manifest.resolve(name)
    if table is None:
        return None
    return table.interference_profile_path(pair.pressure_kgfcm2, pair.geometry.spacing_L_m)


# ---------------------------------------------------------------------------
# Commands

def cmd_speed(args: argparse.Namespace) -> int:
    spec = PipeSpec(args.diameter)
    c = wave_speed(FlowMeasurement(args.flow), spec)
    payload = {
        "flow_lpm": args.flow,
        "diameter_m": args.diameter,
        "area_m2": pipe_area(spec),
        "wave_speed_mps": c,
    }
    _emit(args, payload, f"wave speed: {format_significant(c, 4)} m/s")
    return EXIT_OK


def cmd_xcorr(args: argparse.Namespace) -> int:
    """
    Peak lag and label per axis. With --per-side and --flow each axis also
    gets the ideal raw-lag window for the accuracy target, shifted by the
    calibrated t_noLeak when --calibration and --pressure pick a condition.
    """
    config = analysis_config(args)
    left = read_recording(args.left, RecordingMeta("sensor2", Side.LEFT), args.rate)
    right = read_recording(args.right, RecordingMeta("sensor1", Side.RIGHT), args.rate)
    right_series, left_series, offset = align_series(right.series, left.series)

    cal_path = _opt(args, "calibration")
    table = _load_calibration(cal_path) if cal_path else None
    spacing = 2.0 * args.per_side if args.per_side is not None else None
    calibrated = table is not None and args.pressure is not None and spacing is not None

    profile_path = args.profile
    if profile_path is None and calibrated:
        profile_path = table.interference_profile_path(args.pressure, spacing)
    if profile_path:
        profile = load_profile(profile_path)
        right_series = filter_series(right_series, profile, config.notch_bandwidth_hz)
        left_series = filter_series(left_series, profile, config.notch_bandwidth_hz)

    c = None
    if args.per_side is not None and args.flow is not None:
        c = wave_speed(FlowMeasurement(args.flow, args.pressure or 0.0), PipeSpec(args.diameter))

    axes = list(Axis) if args.axis == "all" else [Axis.parse(args.axis)]
    correlations = correlate_axes(right_series, left_series, axes, normalized=config.normalized,
                                  max_concurrent=config.max_concurrent)
    output = _output_dir(args)

    records = []
    for axis, corr in correlations.items():
        peak = find_peak(corr, interpolate=config.interpolate)
        estimate = classify(replace(peak, peak_lag_s=peak.peak_lag_s + offset), config.threshold_s)
        record = {
            "axis": axis.value,
            "peak_lag_s": estimate.peak_lag_s,
            "peak_value": estimate.peak_value,
            "classification": estimate.classification.value,
        }
        if c is not None:
            axis_cal = table.get(args.pressure, spacing, axis) if calibrated else None
            bounds = ideal_delay_bounds(args.per_side, c, config.epsilon,
                                        axis_cal.t_noLeak_s if axis_cal is not None else None)
            low, high = bounds.window()
            record["ideal_window"] = bounds.to_dict()
            record["in_window"] = low <= estimate.peak_lag_s <= high
        if output is not None:
            record["file"] = str(export_correlation(corr, output / f"xcorr_{axis.value}.csv"))
        records.append(record)

    headers = ["axis", "peak_lag_s", "peak_value", "classification"]
    rows = [[r["axis"], r["peak_lag_s"], r["peak_value"], r["classification"]] for r in records]
    if c is not None:
        headers += ["window_min_s", "window_max_s", "in_window"]
        for row, r in zip(rows, records):
            low, high = r["ideal_window"]["window_s"]
            row += [low, high, "yes" if r["in_window"] else "no"]
    text = render_table(headers, rows, decimals=4)
    payload = {"start_offset_s": offset, "axes": records,
               "profile": str(profile_path) if profile_path else None}
    _emit(args, payload, text)
    return EXIT_OK


def _calibration_for(table: Optional[CalibrationTable], pair: RecordingPair, config: AnalysisConfig,
                     buffer_override: Optional[float]) -> Dict[Axis, CalibrationProfile]:
    if table is None:
        return {axis: CalibrationProfile(0.0, config.t_buffer_s) for axis in Axis}
    profiles = table.profiles_for(pair.pressure_kgfcm2, pair.geometry.spacing_L_m)
    if buffer_override is None:
        return profiles
    return {axis: CalibrationProfile(p.t_noLeak_s, buffer_override, p.n_baselines, p.n_residuals)
            for axis, p in profiles.items()}


def cmd_localize(args: argparse.Namespace) -> int:
    manifest = RunManifest.load(args.manifest)
    config = analysis_config(args, manifest.options)
    cal_path = _opt(args, "calibration") or manifest.calibration_path
    table = _load_calibration(cal_path) if cal_path else None
    spec = manifest.pipe

    def _one(item: Tuple[int, PairEntry]) -> Dict[str, Any]:
        index, entry = item
        name = _entry_name(entry, index)
        try:
            pair = _load_pair(manifest, entry)
            cal = _calibration_for(table, pair, config, _opt(args, "buffer"))
            profile_path = _pair_profile_path(manifest, entry, table, pair)
            profile = load_profile(profile_path) if profile_path else None
            results = localize_pair(pair, cal, FlowMeasurement(entry.flow_lpm, entry.pressure_kgfcm2), spec,
                                    config, profile)
        except (LeakLocError, ValueError) as e:
            logger.warning("pair %s failed: %s", name, e)
            return {"name": name, "scenario": entry.scenario, "error": str(e)}
        records = []
        for result in results:
            record = result.to_dict()
            err = result.error_percent
            record["within_epsilon"] = None if err is None else abs(err) <= 100.0 * config.epsilon
            records.append(record)
        return {"name": name, "scenario": entry.scenario,
                "profile": str(profile_path) if profile_path else None, "results": records}

    outcomes = run_ordered(_one, list(enumerate(manifest.pairs)), max_concurrent=config.max_concurrent)
    failed = [o for o in outcomes if "error" in o]

    rows = []
    for outcome in outcomes:
        if "error" in outcome:
            rows.append([outcome["name"], outcome["scenario"], "-", "ERROR", None, None, None, None, None])
            continue
        for r in outcome["results"]:
            rows.append([outcome["name"], outcome["scenario"], r["axis"], r["classification"],
                         r["t_measured_s"], r["delta_t_s"], r["d_l_m"], r["from_left_m"], r["error_percent"]])
    headers = ["pair", "label", "axis", "detected", "t_measured_s", "dt_s", "d_l_m", "from_left_m", "error_%"]
    text = render_table(headers, rows)
    if failed:
        text += "\n" + "\n".join(f"{o['name']}: {o['error']}" for o in failed)
    text += f"\n{len(outcomes) - len(failed)} of {len(outcomes)} pairs localised"

    payload = {"config": config.to_dict(), "pairs": outcomes}
    output = _output_dir(args)
    if output is not None:
        _write_json(output / "results.json", payload)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    """
    Fit the calibration table and estimate one interference profile per
    no-leak pair. The first profile of each (pressure, spacing) condition is
    recorded in calibration.json, so localize notches with it by default and
    the buffer fit here sees the same filtered data.
    """
    manifest = RunManifest.load(args.manifest)
    config = analysis_config(args, manifest.options)
    output = _output_dir(args) or Path(".")

    no_leak, leak = [], []
    for entry in manifest.pairs:
        pair = _load_pair(manifest, entry)
        (no_leak if pair.scenario is Scenario.NO_LEAK else leak).append((entry, pair))
    if not no_leak:
        raise MissingBaselineError("calibration needs at least one no-leak pair")

    profile_paths = []
    condition_profiles: Dict[Tuple[float, float], Tuple[str, InterferenceProfile]] = {}
    for index, (entry, pair) in enumerate(no_leak):
        try:
            profile = estimate_profile(
                pair.right.series, top_k=config.top_k, estimation_window=config.estimation_window,
                pressure_kgfcm2=pair.pressure_kgfcm2, min_prominence_db=config.min_prominence_db,
            )
        except TooShortError as e:
            logger.warning("no interference profile for %s: %s", _entry_name(entry, index), e)
            continue
        name = f"profile_{_entry_name(entry, index)}.json"
        profile_paths.append(str(save_profile(profile, output / name)))
        condition_profiles.setdefault(condition_key(pair.pressure_kgfcm2, pair.geometry.spacing_L_m), (name, profile))

    leak_profiles = []
    for entry, pair in leak:
        recorded = condition_profiles.get(condition_key(pair.pressure_kgfcm2, pair.geometry.spacing_L_m))
        leak_profiles.append(_entry_profile(manifest, entry) or (recorded[1] if recorded else None))

    table = build_calibration([p for _, p in no_leak], [p for _, p in leak], manifest.pipe, config, leak_profiles)
    for (pressure, spacing), (name, _) in condition_profiles.items():
        table.set_interference_profile(pressure, spacing, name)
    cal_path = table.save(output / CALIBRATION_FILE)

    rows = [[f"{p:g}", f"{s:g}", axis.value, prof.t_noLeak_s, prof.t_buffer_s, prof.n_baselines, prof.n_residuals]
            for (p, s, axis), prof in table]
    text = render_table(["pressure", "spacing_L_m", "axis", "t_noLeak_s", "t_buffer_s", "baselines", "residuals"],
                        rows, decimals=4)
    text += f"\nwrote {cal_path}"
    payload = dict(table.to_dict(), file=str(cal_path), profiles=profile_paths)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """
    A grid document expands into many scenarios; a scenario document is a
    grid of one named after the file. Either way the output directory gets
    one subdirectory per scenario plus a run manifest.
    """
    output = _output_dir(args, required=True)
    path = Path(args.scenario)
    data = read_config_file(path)
    seed = _opt(args, "seed")
    if seed is not None:
        data["rng_seed"] = seed
    config = analysis_config(args)

    if "pressures" in data:
        grid = grid_from_document(data, source=str(path))
    else:
        grid = [(path.stem, config_from_document(data, source=str(path)))]
    manifest_path = write_grid(grid, output, max_concurrent=config.max_concurrent)

    records = [
        {"name": name, "scenario": c.scenario.value, "ground_truth_dt_s": c.ground_truth_dt_s,
         "rng_seed": c.rng_seed}
        for name, c in grid
    ]
    rows = [[r["name"], r["scenario"], r["ground_truth_dt_s"], r["rng_seed"]] for r in records]
    text = render_table(["fixture", "scenario", "truth_dt_s", "seed"], rows, decimals=4)
    text += f"\nwrote {manifest_path}"
    _emit(args, {"manifest": str(manifest_path), "fixtures": records}, text)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    reports = reproduce(args.table, _opt(args, "epsilon"))
    payload = {"tables": [r.to_dict() for r in reports]}
    output = _output_dir(args)
    if output is not None:
        _write_json(output / "reproduce.json", payload)
    _emit(args, payload, "\n\n".join(r.render() for r in reports))
    return EXIT_OK


# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"leakloc: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(debug=bool(_opt(args, "debug")))
    try:
        return args.handler(args)
    except OSError as e:
        print(f"leakloc: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (LeakLocError, ValueError) as e:
        print(f"leakloc: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
