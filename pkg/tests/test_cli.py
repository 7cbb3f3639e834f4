#!/usr/bin/env python3
"""
Tests for the command-line front end
"""

import json

import pandas as pd

from alphaeta.results import sidecar_path
from main import main


def test_estimate_security_threshold(capsys):
    code = main(["estimate", "--L", "13", "--M", "256", "--sigma", "16", "--threshold-bits", "5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "q = 9" in out
    assert "above 8 bits" in out
    assert "n0 = L/U" in out


def test_estimate_threshold_equal_to_L(capsys):
    assert main(["estimate", "--threshold-bits", "13", "--no-quadrature"]) == 0
    assert "q = 0" in capsys.readouterr().out


def test_estimate_vacuous(capsys):
    assert main(["estimate", "--sigma", "64", "--no-quadrature"]) == 0
    out = capsys.readouterr().out
    assert "WARNING" in out
    assert "n0 = L/U" not in out


def test_estimate_json(capsys):
    assert main(["estimate", "--no-quadrature", "--json", "--max-log2-prob", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["probability_violation_q"] == 9


def test_estimate_rejects_bad_sigma(capsys):
    assert main(["estimate", "--sigma", "0"]) == 2


def test_simulate_writes_csv_and_sidecar(tmp_path, small_config_file, capsys):
    out = tmp_path / "res" / "small.csv"
    code = main(["simulate", "--config", str(small_config_file), "--out", str(out), "--threads", "1"])
    assert code == 0
    assert out.exists() and sidecar_path(out).exists()
    assert "mean entropy" in capsys.readouterr().out
    table = pd.read_csv(out)
    assert list(table["q"]) == list(range(1, 13))


def test_simulate_reads_requirements_off_the_curve(tmp_path, small_config_file, capsys):
    out = tmp_path / "req.csv"
    code = main(["simulate", "--config", str(small_config_file), "--out", str(out), "--threads", "1",
                 "--set", "Q_max=1", "--threshold-bits", "5", "--max-log2-prob", "3"])
    assert code == 0
    line = capsys.readouterr().out
    assert "entropy stays above 5 bits" in line
    assert "P_E stays below 2^-3" in line
    requirements = json.loads(sidecar_path(out).read_text())["diagnostics"]["requirements"]
    assert requirements == {"threshold_bits": 5.0, "entropy_crossing_q": None,
                            "max_log2_prob": 3.0, "probability_crossing_q": None}


def test_simulate_additive_override(tmp_path, small_config_file):
    out = tmp_path / "additive.csv"
    code = main(["simulate", "--config", str(small_config_file), "--out", str(out),
                 "--set", "cipher=additive", "--threads", "1"])
    assert code == 0
    table = pd.read_csv(out)
    assert (table["mean_entropy"] - 8).abs().max() < 1e-9
    assert (table["estimate_entropy"] == 8).all()


def test_simulate_missing_config(tmp_path):
    out = tmp_path / "res" / "none.csv"
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(out)]) == 2
    assert not (tmp_path / "res").exists()


def test_simulate_invalid_field_is_named(tmp_path, small_config_file, capsys):
    out = tmp_path / "bad.csv"
    code = main(["simulate", "--config", str(small_config_file), "--out", str(out),
                 "--set", "channel.sigma=-2"])
    assert code == 2
    assert "channel.sigma" in capsys.readouterr().err
    assert not out.exists()


def test_simulate_resource_guard(tmp_path, small_config_file):
    out = tmp_path / "huge.csv"
    code = main(["simulate", "--config", str(small_config_file), "--out", str(out),
                 "--set", "L=20", "--set", "prng={\"kind\": \"lfsr\"}",
                 "--set", "Q_max=10000", "--set", "n_trials=1000"])
    assert code == 3
    assert not out.exists()


def test_simulate_refuses_an_oversize_keystream_table(tmp_path, small_config_file):
    out = tmp_path / "table.csv"
    code = main(["simulate", "--config", str(small_config_file), "--out", str(out),
                 "--set", "L=20", "--set", "prng={\"kind\": \"lfsr\"}",
                 "--set", "Q_max=9000", "--set", "n_trials=1"])
    assert code == 3
    assert not out.exists()


def test_verify_resource_guard_runs_first(small_config_file, capsys):
    code = main(["verify", "--config", str(small_config_file), "--trials", "200",
                 "--set", "L=20", "--set", "prng={\"kind\": \"lfsr\"}", "--set", "Q_max=200000"])
    assert code == 3
    assert "invariant" not in capsys.readouterr().out


def test_verify_needs_two_trials(small_config_file, capsys):
    assert main(["verify", "--config", str(small_config_file), "--trials", "1"]) == 2
    assert "trials" in capsys.readouterr().err


def test_sidecar_reproduces_the_run(tmp_path, small_config_file):
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    assert main(["simulate", "--config", str(small_config_file), "--out", str(first), "--threads", "1"]) == 0
    assert main(["simulate", "--config", str(sidecar_path(first)), "--out", str(second), "--threads", "2"]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_sweep(tmp_path, small_config_file, capsys):
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(small_config_file), "--out", str(out), "--threads", "1",
                 "--set", "n_trials=8", "--param", "sigma", "--values", "2", "4", "8", "16"])
    assert code == 0
    index = pd.read_csv(out / "index.csv")
    assert list(index["channel.sigma"]) == [2.0, 4.0, 8.0, 16.0]
    assert len(list(out.glob("*.meta.json"))) == 4
    for name in index["results"]:
        assert (out / name).exists()
    assert "4 result sets" in capsys.readouterr().out


def test_sweep_rejects_non_numeric_field(tmp_path, small_config_file):
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(small_config_file), "--out", str(out),
                 "--param", "cipher", "--values", "additive"])
    assert code == 2
    assert not out.exists()


def test_sweep_needs_values(tmp_path, small_config_file):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(small_config_file), "--out", str(out), "--param", "sigma"]) == 2
    assert not out.exists()


def test_verify_passes(small_config_file, capsys):
    assert main(["verify", "--config", str(small_config_file), "--trials", "40", "--threads", "1"]) == 0
    assert "all invariants hold" in capsys.readouterr().out


def test_verify_additive_notes_constant_entropy(small_config_file, capsys):
    code = main(["verify", "--config", str(small_config_file), "--set", "cipher=additive",
                 "--trials", "20", "--threads", "1"])
    assert code == 0
    assert "entropy constant" in capsys.readouterr().out


def test_verify_detects_corrupted_density(small_config_file, capsys):
    code = main(["verify", "--config", str(small_config_file), "--trials", "10",
                 "--inject-fault", "corrupt_density"])
    assert code == 1
    out = capsys.readouterr().out
    assert "collision_vs_entropy" in out.split("invariant violated:")[1]


def test_usage_errors():
    assert main([]) == 2
    assert main(["launch"]) == 2
