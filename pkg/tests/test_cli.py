import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sarcv import SimConfig, simulate_field
from sarcv.cli import main


def read_matrix(path):
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    return rows[0], np.array([[float(v) for v in row] for row in rows[1:]])


def test_simulate_writes_field_and_jump_log(tmp_path):
    out = tmp_path / "a"
    code = main(["simulate", "--n", "12", "--jump-intensity", "2.0",
                 "--jump-variance", "0.1", "--seed", "5", "--out", str(out)])
    assert code == 0
    header, samples = read_matrix(out / "samples.csv")
    assert header == [f"x_{j}" for j in range(1, 14)]
    assert samples.shape == (13, 13)

    expected, records = simulate_field(
        SimConfig(n=12, jump_intensity=2.0, jump_variance=0.1, seed=5)
    )
    np.testing.assert_array_equal(samples, expected)

    with open(out / "jumps.csv", newline="") as handle:
        jump_rows = list(csv.reader(handle))
    assert jump_rows[0] == ["time", "size", "covered_step"]
    assert len(jump_rows) == len(records) + 1
    for row, rec in zip(jump_rows[1:], records):
        assert float(row[0]) == rec.time
        assert float(row[1]) == rec.size
        assert int(row[2]) == rec.covered_step


def test_simulate_reruns_byte_identical(tmp_path):
    args = ["simulate", "--n", "10", "--jump-intensity", "1.0",
            "--jump-variance", "0.2", "--seed", "9"]
    main(args + ["--out", str(tmp_path / "x")])
    main(args + ["--out", str(tmp_path / "y")])
    for name in ("samples.csv", "jumps.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def test_estimate_emits_all_estimators(tmp_path, capsys):
    main(["simulate", "--n", "12", "--jump-intensity", "2.0", "--jump-variance", "0.1",
          "--seed", "3", "--out", str(tmp_path)])
    out = tmp_path / "est"
    code = main(["estimate", "--input", str(tmp_path / "samples.csv"), "--out", str(out)])
    assert code == 0
    for name in ("sarcv", "rcv", "sarcv_", "rcv_"):
        header, matrix = read_matrix(out / f"{name}.csv")
        assert matrix.shape == (12, 12)
        np.testing.assert_array_equal(matrix, matrix.T)
    printed = capsys.readouterr().out
    for name in ("sarcv", "rcv", "sarcv_", "rcv_"):
        assert f"{name}: d95=" in printed

    with open(out / "flags.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["kind", "row_index", "flagged"]
    assert len(rows) == 1 + 2 * 12
    assert {row[0] for row in rows[1:]} == {"adjusted", "plain"}
    assert all(row[2] in ("0", "1") for row in rows[1:])


def test_estimate_without_truncation_flags_nothing(tmp_path):
    main(["simulate", "--n", "8", "--seed", "1", "--out", str(tmp_path)])
    out = tmp_path / "est"
    code = main(["estimate", "--input", str(tmp_path / "samples.csv"),
                 "--truncation", "none", "--out", str(out)])
    assert code == 0
    with open(out / "flags.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert all(row[2] == "0" for row in rows[1:])


def test_estimate_rejects_bad_input(tmp_path, capsys):
    assert main(["estimate", "--input", str(tmp_path / "missing.csv")]) == 2
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("x_1,x_2\n1.0,2.0\n3.0\n", encoding="utf-8")
    assert main(["estimate", "--input", str(ragged), "--out", str(tmp_path)]) == 2
    short = tmp_path / "short.csv"
    short.write_text("x_1\n", encoding="utf-8")
    assert main(["estimate", "--input", str(short), "--out", str(tmp_path)]) == 2
    capsys.readouterr()


def write_config(tmp_path, **scenario):
    scenario.setdefault("name", "cli_case")
    scenario.setdefault("sim", {"n": 16, "jump_intensity": 1.0, "jump_variance": 0.1})
    scenario.setdefault("runs", 4)
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"schema_version": 1, "scenario": scenario}), encoding="utf-8")
    return path


def test_mc_outputs_are_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    names = ("runs.csv", "summary.csv", "table1.csv", "metadata.json")
    assert main(["mc", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["mc", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    meta = json.loads((tmp_path / "a" / "metadata.json").read_text())
    assert meta["schema_version"] == 1
    assert meta["scenarios"][0]["name"] == "cli_case"


def test_mc_worker_override_keeps_bytes(tmp_path):
    cfg = write_config(tmp_path, runs=6)
    main(["mc", "--config", str(cfg), "--workers", "1", "--out", str(tmp_path / "w1")])
    main(["mc", "--config", str(cfg), "--workers", "2", "--out", str(tmp_path / "w2")])
    for name in ("runs.csv", "summary.csv", "table1.csv"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()


def test_mc_run_and_seed_overrides(tmp_path):
    cfg = write_config(tmp_path)
    main(["mc", "--config", str(cfg), "--runs", "2", "--seed", "5",
          "--out", str(tmp_path / "o")])
    with open(tmp_path / "o" / "runs.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    # 2 runs x 4 estimators
    assert len(rows) == 1 + 8
    meta = json.loads((tmp_path / "o" / "metadata.json").read_text())
    assert meta["scenarios"][0]["runs"] == 2
    assert meta["scenarios"][0]["master_seed"] == 5


def test_mc_exit_codes(tmp_path, capsys):
    assert main(["mc", "--config", str(tmp_path / "none.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 9, "scenario": {}}), encoding="utf-8")
    assert main(["mc", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_rate_command(tmp_path, capsys):
    code = main(["rate", "--sizes", "8,12,16", "--runs", "3", "--out", str(tmp_path)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "slope=" in printed
    with open(tmp_path / "rate.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["n", "median_rel_err"]
    assert [row[0] for row in rows[1:]] == ["8", "12", "16"]
    assert all(float(row[1]) > 0 for row in rows[1:])


def test_rate_needs_three_sizes(tmp_path, capsys):
    assert main(["rate", "--sizes", "8,16", "--runs", "2", "--out", str(tmp_path)]) == 2
    capsys.readouterr()


def test_heidih_command(tmp_path):
    code = main(["heidih", "--n", "8", "--horizons", "2,3", "--modes", "16",
                 "--substeps", "2", "--runs", "2", "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "heidih.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["scenario", "median_rel_err", "q25", "q75", "runs"]
    assert [row[0] for row in rows[1:]] == ["heidih_T2", "heidih_T3"]


def test_table1_command_small(tmp_path):
    code = main(["table1", "--runs", "2", "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "table1.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["kernel", "metric", "sarcv", "rcv", "sarcv_", "rcv_"]
    assert [row[:2] for row in rows[1:]] == [
        ["smooth", "rel_err"], ["smooth", "d95"], ["rough", "rel_err"], ["rough", "d95"]
    ]
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert len(meta["scenarios"]) == 4


def test_unknown_command_exits_with_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["tabulate"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit):
        main(["rate", "--sizes", "a,b"])


def test_console_script_runs():
    proc = subprocess.run(["sarcv", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout and "heidih" in proc.stdout


def test_module_entry_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "sarcv.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
