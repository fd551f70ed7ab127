import csv
import json
from pathlib import Path

import pytest

from geomlife.cli import main

from helpers import table1_csv, table3_csv

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def table1_path(tmp_path):
    path = tmp_path / "table1.csv"
    path.write_text(table1_csv())
    return path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEstimate:
    def test_reference_table(self, capsys, table1_path):
        code, out, err = run(
            capsys,
            "estimate",
            "--input", str(table1_path),
            "--format", "aggregate",
            "--s", "2",
            "--G", "5",
            "--level", "0.95",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["theta_hat"] == pytest.approx(0.100884, abs=5e-7)
        assert payload["ci"][0] == pytest.approx(0.100526, abs=5e-6)
        assert payload["ci"][1] == pytest.approx(0.101241, abs=5e-6)
        assert payload["m"] == 1447814
        assert "0.1009" in err
        assert "[0.1005, 0.1013]" in err
        assert "9.88" in err and "9.95" in err

    def test_bundled_data_file(self, capsys):
        code, out, _ = run(
            capsys, "estimate", "--input", str(DATA / "table3.csv"), "--s", "2", "--G", "5"
        )
        assert code == 0
        assert json.loads(out)["risk_time"] == 2727516

    def test_csv_output(self, capsys, table1_path, tmp_path):
        out_path = tmp_path / "result.csv"
        code, out, _ = run(
            capsys,
            "estimate",
            "--input", str(table1_path),
            "--s", "2",
            "--G", "5",
            "--output-format", "csv",
            "--output", str(out_path),
        )
        assert code == 0
        assert out == ""
        rows = list(csv.DictReader(out_path.open()))
        assert len(rows) == 1
        assert float(rows[0]["theta_hat"]) == pytest.approx(0.100884, abs=5e-7)

    def test_empty_table_is_input_error(self, capsys, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("cohort,outcome,count\n")
        code, _, err = run(capsys, "estimate", "--input", str(path), "--s", "2", "--G", "5")
        assert code == 1
        assert "no risk time" in err

    def test_only_censored_units_degenerate(self, capsys, tmp_path):
        path = tmp_path / "units.csv"
        path.write_text("t,d,censored\n0,,1\n1,,1\n3,,1\n")
        code, out, err = run(
            capsys,
            "estimate",
            "--input", str(path),
            "--format", "units",
            "--s", "2",
            "--G", "5",
        )
        assert code == 2
        payload = json.loads(out)
        assert payload["theta_hat"] == 0.0
        assert payload["degenerate"] is True
        assert "degenerate" in err

    def test_missing_input_flag(self, capsys):
        code, _, err = run(capsys, "estimate", "--s", "2", "--G", "5")
        assert code == 1
        assert "--input" in err

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("cohort,outcome,count\n0,9,5\n")
        code, _, err = run(capsys, "estimate", "--input", str(path), "--s", "2", "--G", "5")
        assert code == 1
        assert "line 2" in err


class TestSimulate:
    def test_mse_table(self, capsys, tmp_path):
        out_path = tmp_path / "mse.csv"
        code, _, err = run(
            capsys,
            "simulate",
            "--study", "mse",
            "--theta0", "0.1",
            "--s", "2",
            "--G", "5",
            "--K", "8",
            "--n-list", "200,400",
            "--seed", "42",
            "--output-format", "csv",
            "--output", str(out_path),
        )
        assert code == 0
        rows = list(csv.DictReader(out_path.open()))
        assert [row["n"] for row in rows] == ["200", "400"]
        assert all(float(row["mse"]) >= 0 for row in rows)

    def test_single_replicate(self, capsys):
        code, out, _ = run(
            capsys,
            "simulate",
            "--study", "coverage",
            "--theta0", "0.1",
            "--s", "2",
            "--G", "5",
            "--K", "1",
            "--n", "50",
            "--seed", "1",
        )
        assert code == 0
        rows = json.loads(out)
        assert len(rows) == 1
        assert rows[0]["K"] == 1

    def test_byte_identical_reruns(self, capsys, tmp_path):
        args = [
            "simulate",
            "--study", "clt",
            "--theta0", "0.1",
            "--s", "2",
            "--G", "5",
            "--K", "12",
            "--n", "300",
            "--seed", "9",
        ]
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        assert run(capsys, *args, "--output", str(first))[0] == 0
        assert run(capsys, *args, "--output", str(second))[0] == 0
        assert first.read_bytes() == second.read_bytes()

    def test_explicit_tdist(self, capsys):
        code, out, _ = run(
            capsys,
            "simulate",
            "--study", "coverage",
            "--theta0", "0.2",
            "--s", "2",
            "--G", "3",
            "--K", "4",
            "--n", "100",
            "--seed", "2",
            "--tdist", "0.5,0.25,0.25",
        )
        assert code == 0
        assert json.loads(out)[0]["theta0"] == 0.2

    def test_invalid_tdist(self, capsys):
        code, _, err = run(
            capsys,
            "simulate",
            "--study", "coverage",
            "--theta0", "0.2",
            "--s", "2",
            "--G", "3",
            "--K", "2",
            "--n", "50",
            "--seed", "2",
            "--tdist", "0.5,0.6,0.2",
        )
        assert code == 1
        assert "sum to 1" in err


class TestCheck:
    def test_random_cases(self, capsys):
        code, out, err = run(capsys, "check", "--random", "20", "--seed", "7", "--s", "2")
        assert code == 0
        rows = json.loads(out)
        assert len(rows) == 20
        assert all(row["abs_diff"] <= 1e-6 for row in rows)

    def test_reference_table(self, capsys, table1_path):
        code, out, _ = run(
            capsys, "check", "--input", str(table1_path), "--s", "2", "--G", "5"
        )
        assert code == 0
        assert json.loads(out)[0]["abs_diff"] <= 1e-6

    def test_degenerate_stats(self, capsys, tmp_path):
        path = tmp_path / "cens.csv"
        path.write_text("cohort,outcome,count\n,cens,10\n")
        code, _, err = run(capsys, "check", "--input", str(path), "--s", "2", "--G", "5")
        assert code == 2
        assert "degenerate" in err


class TestPaths:
    def header_and_rows(self, out):
        lines = out.strip().splitlines()
        reader = csv.DictReader(lines)
        return list(reader)

    def test_event_row(self, capsys):
        code, out, _ = run(
            capsys, "paths", "--x", "4", "--t", "3", "--s", "2", "--G", "5", "--theta", "0.1"
        )
        assert code == 0
        rows = self.header_and_rows(out)
        assert [row["x"] for row in rows] == ["1", "2", "3", "4", "5", "6"]
        at4 = rows[3]
        assert at4["dN_tc"] == "1"
        assert float(at4["dA_tc"]) == pytest.approx(0.1)
        assert float(at4["dM_tc"]) == pytest.approx(0.9)

    def test_truncated_unit(self, capsys):
        code, out, _ = run(
            capsys, "paths", "--x", "2", "--t", "4", "--s", "2", "--G", "5", "--theta", "0.1"
        )
        assert code == 0
        for row in self.header_and_rows(out):
            assert row["dN_tc"] == "0"
            assert float(row["Y_tc_prev"]) == 0.0

    def test_censored_unit(self, capsys):
        code, out, _ = run(
            capsys, "paths", "--x", "10", "--t", "3", "--s", "2", "--G", "5", "--theta", "0.1"
        )
        assert code == 0
        rows = self.header_and_rows(out)
        at_risk = [row["x"] for row in rows if row["Y_tc_prev"] == "1"]
        assert at_risk == ["4", "5"]


class TestConfigFile:
    def test_config_supplies_defaults(self, capsys, table1_path, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"s": 2, "G": 5, "level": 0.99}))
        code, out, _ = run(
            capsys, "estimate", "--config", str(cfg), "--input", str(table1_path)
        )
        assert code == 0
        assert json.loads(out)["level"] == 0.99

    def test_flags_win_over_config(self, capsys, table1_path, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"s": 2, "G": 5, "level": 0.99}))
        code, out, _ = run(
            capsys,
            "estimate",
            "--config", str(cfg),
            "--input", str(table1_path),
            "--level", "0.9",
        )
        assert code == 0
        assert json.loads(out)["level"] == 0.9

    def test_missing_config_file(self, capsys):
        code, _, err = run(capsys, "estimate", "--config", "/nonexistent.json")
        assert code == 1
        assert "error" in err
