import json
import math
import os

import numpy as np
import pytest

from nullvalue.cli import SWEEP_HEADER, main


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        raw = fh.read()
    assert "\r" not in raw  # LF line endings
    lines = raw.strip().split("\n")
    header = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    return header, rows


def test_help_and_version_exit_zero(capsys):
    assert main(["--help"]) == 0
    assert main(["--version"]) == 0
    capsys.readouterr()


def test_unknown_command_exits_2(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_sweep_csv_schema_and_manifest(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep-snr", "--steps", "11", "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(str(out))
    assert header == SWEEP_HEADER
    assert len(rows) == 11
    man = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert man["command"] == "sweep-snr"
    assert str(out) in man["outputs"]


def test_sweep_validation_errors(capsys):
    assert main(["sweep-snr", "--steps", "0"]) == 2
    assert main(["sweep-snr", "--delta-min", "0.2", "--delta-max", "0.1"]) == 2
    assert main(["sweep-snr", "--p", "0"]) == 2
    assert main(["sweep-snr", "--mode", "mc"]) == 2  # seed required
    capsys.readouterr()


def test_sweep_mc_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        rc = main(["sweep-snr", "--mode", "mc", "--seed", "5", "--steps", "7",
                   "--out", str(path)])
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()
    capsys.readouterr()


def test_sweep_degrees_converts_input_only(tmp_path):
    rad = tmp_path / "rad.csv"
    deg = tmp_path / "deg.csv"
    main(["sweep-snr", "--delta-min", "0", "--delta-max", "0.2", "--steps",
          "5", "--out", str(rad)])
    main(["sweep-snr", "--degrees", "--delta-min", "0",
          "--delta-max", str(math.degrees(0.2)), "--steps", "5",
          "--delta-m", str(math.degrees(0.1)), "--out", str(deg)])
    _, rows_r = read_csv(str(rad))
    _, rows_d = read_csv(str(deg))
    # CSV bodies agree and stay in radians
    for r, d in zip(rows_r, rows_d):
        assert r == pytest.approx(d, abs=1e-9)


def test_optimize_stdout_and_argmin(tmp_path, capsys):
    rc = main(["optimize", "--cap-delta", "0.1", "--p", "0.1", "--grid", "41",
               "--out", str(tmp_path / "c.csv")])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "argmin" in printed
    header, rows = read_csv(str(tmp_path / "c.csv"))
    assert header == ["theta_M", "theta_f", "p_err"]
    assert len(rows) == 41 * 41


def test_optimize_validation(capsys):
    assert main(["optimize", "--cap-delta", "0.1", "--p", "0.1",
                 "--grid", "16"]) == 2
    assert main(["optimize", "--cap-delta", "3.0", "--p", "0.1"]) == 2
    capsys.readouterr()


def test_simulate_experiment_outputs(tmp_path, capsys):
    cfg = {"photons_per_measurement": 2000, "bin_count": 4}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "run"
    rc = main(["simulate-experiment", "--config", str(cfg_path),
               "--delta-list", "0.05,0.1", "--seed", "3",
               "--out-dir", str(out_dir)])
    assert rc == 0
    files = sorted(os.listdir(out_dir))
    assert files == ["counts_000.csv", "counts_001.csv", "manifest.json",
                     "summary.json"]
    header, rows = read_csv(str(out_dir / "counts_000.csv"))
    assert header == ["delta", "channel", "bin", "count"]
    assert len(rows) == 3 * 4  # channels x bins
    summary = json.loads((out_dir / "summary.json").read_text())
    assert len(summary["per_delta"]) == 2
    assert "snr" in summary["per_delta"][0]
    capsys.readouterr()


def test_simulate_experiment_invalid_config(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"eta_w": 2.0}))
    rc = main(["simulate-experiment", "--config", str(cfg_path),
               "--delta-list", "0.05", "--seed", "1",
               "--out-dir", str(tmp_path / "x")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "eta_w" in err


def test_simulate_experiment_determinism(tmp_path, capsys):
    dirs = [tmp_path / "r1", tmp_path / "r2"]
    for d in dirs:
        rc = main(["simulate-experiment", "--delta-list", "0.05",
                   "--seed", "11", "--out-dir", str(d)])
        assert rc == 0
    a = (dirs[0] / "counts_000.csv").read_bytes()
    b = (dirs[1] / "counts_000.csv").read_bytes()
    assert a == b
    capsys.readouterr()


def test_povm_check_output(capsys):
    rc = main(["povm-check", "--theta-m", "1.5708", "--p", "0.15",
               "--theta-f", "1.5708"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "completeness defect" in out
    defect = float(out.split("completeness defect:")[1].split("\n")[0])
    assert defect < 1e-12
    # diagonal forms at theta_m = theta_f = pi/2 (up to angle rounding)
    assert "Pi_1" in out and "Pi_2" in out and "Pi_?" in out


def test_povm_check_p_zero(capsys):
    rc = main(["povm-check", "--theta-m", "0.3", "--p", "0",
               "--theta-f", "0.8"])
    assert rc == 0
    block = capsys.readouterr().out.split("Pi_2")[0]
    nums = [abs(complex(tok)) for line in block.splitlines()[1:3]
            for tok in line.strip("[] ").split() if tok]
    assert max(nums) < 1e-12


def test_povm_check_validation(capsys):
    assert main(["povm-check", "--theta-m", "nan", "--p", "0.1",
                 "--theta-f", "0.5"]) == 2
    assert main(["povm-check", "--theta-m", "0.5", "--p", "1.5",
                 "--theta-f", "0.5"]) == 2
    capsys.readouterr()
