import json

import numpy as np
import pytest

from volbreak import FlatShape, PricePanel, generate_panel, scenario_h0, scenario_ha3, write_panel_csv
from volbreak.cli import main


def panel_to_csv(returns, path):
    prices = 100.0 * np.exp(returns.values)
    days = tuple(str(i + 1) for i in range(prices.shape[0]))
    write_panel_csv(PricePanel(days, prices), path)


@pytest.fixture
def ha3_csv(tmp_path):
    path = tmp_path / "break.csv"
    panel_to_csv(generate_panel(scenario_ha3(0.5, 200, 26, seed=6)), path)
    return str(path)


@pytest.fixture
def null_csv(tmp_path):
    path = tmp_path / "null.csv"
    panel_to_csv(generate_panel(scenario_h0(FlatShape(), 150, 20, seed=4)), path)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestTestCommand:
    def test_detects_injected_break(self, capsys, ha3_csv):
        code, out = run_cli(
            capsys, "test", "--input", ha3_csv, "--draws", "1500", "--seed", "1"
        )
        assert code == 0
        report = json.loads(out)
        tests = report["tests"]
        assert tests["shape"]["reject"] and tests["total"]["reject"] and tests["global"]["reject"]
        pooled = report["change_points"]["pooled"]
        assert abs(pooled["theta"] - 0.5) <= 0.05
        assert report["panel"]["n_days"] == 200
        assert report["panel"]["k_intervals"] == 26

    def test_null_panel_reports_null_changepoints(self, capsys, null_csv):
        code, out = run_cli(
            capsys, "test", "--input", null_csv, "--draws", "1200", "--seed", "0"
        )
        assert code == 0
        report = json.loads(out)
        assert report["change_points"] == {"shape": None, "total": None, "pooled": None}
        # schema-stable: every test block carries the same keys as a rejection run
        assert set(report["tests"]) == {"shape", "total", "global"}

    def test_alpha_one_populates_every_estimate(self, capsys, null_csv):
        code, out = run_cli(
            capsys, "test", "--input", null_csv, "--draws", "600", "--alpha", "1.0"
        )
        assert code == 0
        report = json.loads(out)
        assert all(v is not None for v in report["change_points"].values())

    def test_objective_paths_csv(self, capsys, ha3_csv, tmp_path):
        obj_path = tmp_path / "objectives.csv"
        code, _ = run_cli(
            capsys, "test", "--input", ha3_csv, "--draws", "400",
            "--objective-csv", str(obj_path),
        )
        assert code == 0
        lines = obj_path.read_text().strip().splitlines()
        assert lines[0] == "day_index,date,shape_objective,total_objective"
        assert len(lines) == 1 + 200
        # objectives peak near the injected mid-sample break
        import csv as _csv

        rows = list(_csv.DictReader(lines))
        peak = max(rows, key=lambda r: float(r["shape_objective"]))
        assert abs(int(peak["day_index"]) - 100) <= 15
        assert all(float(r["total_objective"]) >= 0.0 for r in rows)

    def test_report_written_to_file(self, capsys, ha3_csv, tmp_path):
        out_path = tmp_path / "report.json"
        code, _ = run_cli(
            capsys, "test", "--input", ha3_csv, "--draws", "400", "--out", str(out_path)
        )
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["tool"]["name"] == "volbreak"

    def test_parse_error_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("date,p0,p1,p2\n2020-01-02,100,0,100\n")
        code, out = run_cli(capsys, "test", "--input", str(bad))
        assert code == 2
        error = json.loads(out)["error"]
        assert error["line"] == 2

    def test_flat_day_exits_3(self, capsys, tmp_path):
        flat = tmp_path / "flat.csv"
        rows = ["date,p0,p1,p2"]
        rows.append("1,100,100,100")  # flat day: zero quadratic variation
        rows += [f"{i},100,{100 + i},{101 + i}" for i in range(2, 40)]
        flat.write_text("\n".join(rows) + "\n")
        code, out = run_cli(capsys, "test", "--input", str(flat))
        assert code == 3
        assert json.loads(out)["error"]["type"] == "DegenerateDataError"

    def test_missing_input_exits_2(self, capsys, tmp_path):
        code, out = run_cli(capsys, "test", "--input", str(tmp_path / "ghost.csv"))
        assert code == 2
        assert "error" in json.loads(out)


class TestSegmentCommand:
    def test_single_break_panel(self, capsys, ha3_csv):
        code, out = run_cli(
            capsys, "segment", "--input", ha3_csv,
            "--draws", "1200", "--min-seg", "30", "--seed", "3",
        )
        assert code == 0
        report = json.loads(out)
        assert len(report["breaks"]) >= 1
        strongest = min(report["breaks"], key=lambda b: b["p_value"])
        assert abs(strongest["day_index"] - 100) <= 20

    def test_oversized_min_seg_yields_empty(self, capsys, null_csv):
        code, out = run_cli(
            capsys, "segment", "--input", null_csv, "--min-seg", "80", "--draws", "300"
        )
        assert code == 0
        assert json.loads(out)["breaks"] == []


class TestSimulateCommand:
    def test_size_table_shape(self, capsys):
        code, out = run_cli(
            capsys, "simulate", "--scenario", "size", "--shape", "flat",
            "--n", "40", "--k", "8", "--reps", "10", "--seed", "7",
            "--draws", "200", "--series-j", "100", "--workers", "1",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "scenario,n,k,level,test,rejection_rate"
        assert len(lines) == 1 + 9  # three levels x three tests

    def test_byte_identical_rerun(self, capsys):
        args = (
            "simulate", "--scenario", "size", "--shape", "sine",
            "--n", "30", "--k", "6", "--reps", "8", "--seed", "11",
            "--draws", "150", "--series-j", "80", "--workers", "2",
        )
        _, first = run_cli(capsys, *args)
        _, second = run_cli(capsys, *args)
        assert first == second

    def test_estimator_scenario_writes_draws(self, capsys, tmp_path):
        out_csv = tmp_path / "theta.csv"
        code, _ = run_cli(
            capsys, "simulate", "--scenario", "estimator", "--alternative", "ha3",
            "--theta", "0.5", "--n", "60", "--k", "10", "--reps", "5",
            "--seed", "13", "--draws", "300", "--workers", "1",
            "--out", str(out_csv),
        )
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "scenario,n,k,rep,estimator,theta_hat"
        assert len(lines) == 6
        meta = json.loads((tmp_path / "theta.csv.meta.json").read_text())
        assert meta["reps"] == 5
        assert meta["seed"] == 13

    def test_gchange_scenario_runs(self, capsys):
        code, out = run_cli(
            capsys, "simulate", "--scenario", "gchange",
            "--n", "40", "--k", "8", "--reps", "6", "--seed", "17",
            "--draws", "150", "--series-j", "80", "--workers", "1",
        )
        assert code == 0
        assert "GChange" in out


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scenario", "warp"])
    assert exc.value.code == 2
