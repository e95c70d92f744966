"""
Tests for the leakloc command line: output formats and exit codes.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from leakloc.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, analysis_config, build_parser, main
from leakloc.hydraulics import FlowMeasurement, PipeSpec, wave_speed
from leakloc.json_compat import dumps, loads
from leakloc.localizer import CalibrationProfile, CalibrationTable, ideal_delay_bounds
from leakloc.signal_core import write_recording

from conftest import make_series


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_json(path, data):
    path.write_text(dumps(data))
    return path


class TestSpeed:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "speed", "--flow", "14.6", "--diameter", "0.0334")
        assert code == EXIT_OK
        assert out.strip() == "wave speed: 0.2777 m/s"

    def test_json(self, capsys):
        code, out, _ = run(capsys, "--json", "speed", "--flow", "18.5")
        assert code == EXIT_OK
        data = loads(out)
        assert data["wave_speed_mps"] == pytest.approx(0.352, abs=0.001)
        assert data["diameter_m"] == 0.0334

    def test_json_after_subcommand(self, capsys):
        code, out, _ = run(capsys, "speed", "--flow", "22.8", "--json")
        assert code == EXIT_OK
        assert loads(out)["wave_speed_mps"] == pytest.approx(0.4337, abs=0.0005)

    def test_missing_flow_is_usage_error(self, capsys):
        code, _, err = run(capsys, "speed")
        assert code == EXIT_USAGE
        assert "--flow" in err

    def test_bad_diameter(self, capsys):
        code, _, err = run(capsys, "speed", "--flow", "10", "--diameter", "0")
        assert code == EXIT_USAGE
        assert "leakloc: error" in err


class TestParser:
    def test_unknown_command(self, capsys):
        assert run(capsys, "transmogrify")[0] == EXIT_USAGE

    def test_no_command(self, capsys):
        assert run(capsys)[0] == EXIT_USAGE

    def test_flag_precedence(self, tmp_path):
        config_file = tmp_path / "analysis.conf"
        config_file.write_text("threshold_s = 0.4\nepsilon = 0.05\ntop_k = 2\n")
        args = build_parser().parse_args(["--config", str(config_file), "reproduce", "--epsilon", "0.07"])
        config = analysis_config(args, {"top_k": 3, "epsilon": 0.06})
        assert config.threshold_s == 0.4
        assert config.top_k == 3
        assert config.epsilon == 0.07


class TestXcorr:
    def test_identical_files(self, tmp_path, capsys, rng):
        series = make_series(rng.standard_normal((1000, 3)))
        write_recording(series, tmp_path / "a.csv")
        write_recording(series, tmp_path / "b.csv")
        code, out, _ = run(capsys, "xcorr", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"),
                           "--json", "--output", str(tmp_path / "plots"))
        assert code == EXIT_OK
        data = loads(out)
        assert data["start_offset_s"] == 0.0
        assert [r["axis"] for r in data["axes"]] == ["x", "y", "z"]
        for record in data["axes"]:
            assert record["peak_lag_s"] == 0.0
            assert record["peak_value"] == pytest.approx(1.0)
            assert record["classification"] == "NoLeak"
            assert Path(record["file"]).is_file()

    def test_single_axis_shift(self, tmp_path, capsys, rng):
        x = rng.standard_normal((2000, 3))
        write_recording(make_series(np.roll(x, 75, axis=0)), tmp_path / "left.csv")
        write_recording(make_series(x), tmp_path / "right.csv")
        code, out, _ = run(capsys, "xcorr", str(tmp_path / "left.csv"), str(tmp_path / "right.csv"),
                           "--axis", "y", "--json")
        assert code == EXIT_OK
        (record,) = loads(out)["axes"]
        assert record["axis"] == "y"
        assert record["peak_lag_s"] == pytest.approx(0.75)
        assert record["classification"] == "Leak"

    def test_ideal_window_per_axis(self, tmp_path, capsys, rng):
        series = make_series(rng.standard_normal((1000, 3)))
        write_recording(series, tmp_path / "a.csv")
        write_recording(series, tmp_path / "b.csv")
        code, out, _ = run(capsys, "xcorr", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"),
                           "--per-side", "1.0", "--flow", "18.5", "--json")
        assert code == EXIT_OK
        c = wave_speed(FlowMeasurement(18.5), PipeSpec())
        expected = ideal_delay_bounds(1.0, c, 0.029).window()
        for record in loads(out)["axes"]:
            assert record["ideal_window"]["window_s"] == pytest.approx(list(expected))
            assert record["in_window"] is True

    def test_calibrated_window_is_shifted(self, tmp_path, capsys, rng):
        series = make_series(rng.standard_normal((1000, 3)))
        write_recording(series, tmp_path / "a.csv")
        write_recording(series, tmp_path / "b.csv")
        table = CalibrationTable()
        for axis in ("x", "y", "z"):
            table.set(1.0, 2.0, axis, CalibrationProfile(t_noLeak_s=-0.14, t_buffer_s=0.0))
        cal = table.save(tmp_path / "calibration.json")
        code, out, _ = run(capsys, "xcorr", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"),
                           "--per-side", "1.0", "--flow", "18.5", "--pressure", "1.0",
                           "--calibration", str(cal), "--json")
        assert code == EXIT_OK
        c = wave_speed(FlowMeasurement(18.5, 1.0), PipeSpec())
        low, high = ideal_delay_bounds(1.0, c, 0.029).window()
        for record in loads(out)["axes"]:
            assert record["ideal_window"]["t_noLeak_s"] == -0.14
            assert record["ideal_window"]["window_s"] == pytest.approx([low - 0.14, high - 0.14])

    def test_window_columns_in_text(self, tmp_path, capsys, rng):
        series = make_series(rng.standard_normal((1000, 3)))
        write_recording(series, tmp_path / "a.csv")
        write_recording(series, tmp_path / "b.csv")
        code, out, _ = run(capsys, "xcorr", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"),
                           "--per-side", "1.0", "--flow", "18.5", "--axis", "z")
        assert code == EXIT_OK
        assert out.splitlines()[0].split()[-3:] == ["window_min_s", "window_max_s", "in_window"]

    def test_simulated_fixtures_are_labelled(self, tmp_path, capsys):
        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [1.0], "duration_s": 40,
                                                   "leak_fraction": 0.25})
        assert run(capsys, "simulate", str(grid), "--output", str(tmp_path / "fx"))[0] == EXIT_OK
        expected = {"p1_d1_leak": "Leak", "p1_d1_noleak": "NoLeak"}
        for name, label in expected.items():
            fixture = tmp_path / "fx" / name
            code, out, _ = run(capsys, "xcorr", str(fixture / "left.csv"), str(fixture / "right.csv"), "--json")
            assert code == EXIT_OK
            assert {r["classification"] for r in loads(out)["axes"]} == {label}

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code, _, err = run(capsys, "xcorr", str(tmp_path / "nope.csv"), str(tmp_path / "nope2.csv"))
        assert code == EXIT_IO
        assert "I/O error" in err

    def test_malformed_file(self, tmp_path, capsys):
        (tmp_path / "bad.csv").write_text("t,ax,ay,az\n0,1,2\n")
        code, _, _ = run(capsys, "xcorr", str(tmp_path / "bad.csv"), str(tmp_path / "bad.csv"))
        assert code == EXIT_USAGE


class TestSimulate:
    def test_same_seed_same_bytes(self, tmp_path, capsys):
        scenario = write_json(tmp_path / "leak.json",
                              {"per_side_m": 1.0, "flow_lpm": 18.5, "leak_from_left_m": 0.5, "duration_s": 10})
        for out_dir in ("a", "b"):
            code, _, _ = run(capsys, "simulate", str(scenario), "--output", str(tmp_path / out_dir), "--seed", "7")
            assert code == EXIT_OK
        for name in ("leak/left.csv", "leak/right.csv", "leak/manifest.json", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert loads((tmp_path / "a" / "leak" / "manifest.json").read_text())["rng_seed"] == 7

    def test_json_summary(self, tmp_path, capsys):
        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [0.5], "duration_s": 5})
        code, out, _ = run(capsys, "simulate", str(grid), "--output", str(tmp_path / "out"), "--json")
        assert code == EXIT_OK
        data = loads(out)
        assert [f["name"] for f in data["fixtures"]] == ["p1_d0.5_leak", "p1_d0.5_noleak"]
        assert data["fixtures"][1]["ground_truth_dt_s"] is None

    def test_leak_outside_span(self, tmp_path, capsys):
        scenario = write_json(tmp_path / "bad.json",
                              {"spacing_L_m": 2.0, "wave_speed_mps": 0.35, "leak_from_left_m": 2.5})
        code, _, err = run(capsys, "simulate", str(scenario), "--output", str(tmp_path / "out"))
        assert code == EXIT_USAGE
        assert "leak_from_left_m" in err

    def test_output_required(self, tmp_path, capsys):
        scenario = write_json(tmp_path / "s.json", {"spacing_L_m": 2.0, "wave_speed_mps": 0.35})
        assert run(capsys, "simulate", str(scenario))[0] == EXIT_USAGE


class TestManifestCommands:
    def test_localize_missing_manifest_file(self, tmp_path, capsys):
        manifest = write_json(tmp_path / "manifest.json", {"pairs": [{
            "left": "missing_left.csv", "right": "missing_right.csv", "spacing_L_m": 2.0,
            "pressure_kgfcm2": 1.0, "flow_lpm": 18.5, "scenario": "Leak",
        }]})
        code, _, err = run(capsys, "localize", str(manifest))
        assert code == EXIT_USAGE
        assert "missing_left.csv" in err

    def test_localize_bad_manifest(self, tmp_path, capsys):
        manifest = tmp_path / "manifest.json"
        manifest.write_text("{broken")
        assert run(capsys, "localize", str(manifest))[0] == EXIT_USAGE

    def test_localize_pair_missing_fields(self, tmp_path, capsys):
        manifest = write_json(tmp_path / "manifest.json", {"pairs": [{"left": "a.csv"}]})
        code, _, err = run(capsys, "localize", str(manifest))
        assert code == EXIT_USAGE
        assert "PairEntry" in err

    def test_calibration_skew_from_cli(self, tmp_path, capsys):
        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [1.0], "duration_s": 40,
                                                   "clock_skew_s": -0.14})
        assert run(capsys, "simulate", str(grid), "--output", str(tmp_path / "fx"))[0] == EXIT_OK
        code, out, _ = run(capsys, "calibrate", str(tmp_path / "fx" / "manifest.json"),
                           "--output", str(tmp_path / "cal"), "--json")
        assert code == EXIT_OK
        entries = loads(out)["entries"]
        assert len(entries) == 3
        for entry in entries:
            assert entry["t_noLeak_s"] == pytest.approx(-0.14, abs=0.01)

    def test_localize_notches_with_calibrated_profile(self, tmp_path, capsys, monkeypatch):
        import leakloc.localizer

        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [1.0], "duration_s": 40,
                                                   "leak_fraction": 0.25})
        assert run(capsys, "simulate", str(grid), "--output", str(tmp_path / "fx"))[0] == EXIT_OK
        manifest = tmp_path / "fx" / "manifest.json"
        code, out, _ = run(capsys, "calibrate", str(manifest), "--output", str(tmp_path / "cal"), "--json")
        assert code == EXIT_OK
        cal_file = Path(loads(out)["file"])
        refs = loads(cal_file.read_text())["interference_profiles"]
        assert [r["path"] for r in refs] == ["profile_p1_d1_noleak.json"]

        calls = []
        original = leakloc.localizer.filter_series

        def counting(*args, **kwargs):
            calls.append(1)
            return original(*args, **kwargs)

        monkeypatch.setattr(leakloc.localizer, "filter_series", counting)
        code, _, _ = run(capsys, "localize", str(manifest), "--calibration", str(cal_file),
                         "--output", str(tmp_path / "res"))
        assert code == EXIT_OK
        assert calls
        results = loads((tmp_path / "res" / "results.json").read_text())
        for pair in results["pairs"]:
            assert pair["profile"].endswith("profile_p1_d1_noleak.json")

    def test_localize_missing_calibrated_profile(self, tmp_path, capsys):
        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [1.0], "duration_s": 40})
        assert run(capsys, "simulate", str(grid), "--output", str(tmp_path / "fx"))[0] == EXIT_OK
        manifest = tmp_path / "fx" / "manifest.json"
        assert run(capsys, "calibrate", str(manifest), "--output", str(tmp_path / "cal"))[0] == EXIT_OK
        (tmp_path / "cal" / "profile_p1_d1_noleak.json").unlink()
        code, _, err = run(capsys, "localize", str(manifest), "--calibration", str(tmp_path / "cal" / "calibration.json"))
        assert code == EXIT_USAGE
        assert "profile_p1_d1_noleak.json" in err

    def test_calibrate_needs_baseline(self, tmp_path, capsys):
        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [0.5], "duration_s": 20,
                                                   "include_no_leak": False})
        assert run(capsys, "simulate", str(grid), "--output", str(tmp_path / "fx"))[0] == EXIT_OK
        code, _, err = run(capsys, "calibrate", str(tmp_path / "fx" / "manifest.json"),
                           "--output", str(tmp_path / "cal"))
        assert code == EXIT_USAGE
        assert "no-leak" in err

    def test_simulate_calibrate_localize(self, tmp_path, capsys):
        grid = write_json(tmp_path / "grid.json", {"pressures": [1.0], "per_side_m": [1.0], "duration_s": 60,
                                                   "leak_fraction": 0.25})
        assert run(capsys, "simulate", str(grid), "--output", str(tmp_path / "fx"))[0] == EXIT_OK
        manifest = tmp_path / "fx" / "manifest.json"

        code, out, _ = run(capsys, "calibrate", str(manifest), "--output", str(tmp_path / "cal"), "--json")
        assert code == EXIT_OK
        cal = loads(out)
        assert len(cal["entries"]) == 3
        assert Path(cal["file"]).is_file()
        assert len(cal["profiles"]) == 1

        code, out, _ = run(capsys, "localize", str(manifest), "--calibration", cal["file"],
                           "--output", str(tmp_path / "res"))
        assert code == EXIT_OK
        assert "2 of 2 pairs localised" in out
        results = loads((tmp_path / "res" / "results.json").read_text())
        leak = results["pairs"][0]
        assert leak["name"] == "p1_d1_leak"
        for record in leak["results"]:
            assert record["classification"] == "Leak"
            assert abs(record["from_left_m"] - 0.5) <= 0.352 / 200 + 0.02
            assert record["within_epsilon"] is True


class TestReproduce:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "reproduce", "--table", "5")
        assert code == EXIT_OK
        assert out.startswith("Table 5:")

    def test_all_json_to_file(self, tmp_path, capsys):
        code, out, _ = run(capsys, "reproduce", "--json", "--output", str(tmp_path))
        assert code == EXIT_OK
        tables = loads(out)["tables"]
        assert [t["table"] for t in tables] == ["1", "4", "5", "6"]
        assert all(t["ok"] for t in tables)
        assert (tmp_path / "reproduce.json").is_file()

    def test_unknown_table(self, capsys):
        assert run(capsys, "reproduce", "--table", "9")[0] == EXIT_USAGE
