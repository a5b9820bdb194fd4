import csv
import json
import subprocess
import sys

import pytest

from cclab import __version__
from cclab.cli import main
from cclab.greater_than import SWEEP_FIELDS


def run_cli(*args):
    return main([str(a) for a in args])


def test_missing_required_flag_is_a_usage_error(capsys):
    assert run_cli("pj", "sample", "--k", 2) == 2
    assert "--n" in capsys.readouterr().err


def test_unknown_subcommand_is_a_usage_error():
    assert run_cli("nonsense") == 2
    assert run_cli("gt", "explode", "--n", 8) == 2


def test_missing_seed_is_a_usage_error(monkeypatch):
    monkeypatch.delenv("CCLAB_SEED", raising=False)
    assert run_cli("gt", "run", "--n", 16, "--b", 4, "--trials", 5) == 2


def test_bad_budget_range():
    assert run_cli("gt", "sweep", "--n", 16, "--budgets", "5:3", "--seed", 0) == 2
    assert run_cli("gt", "sweep", "--n", 16, "--budgets", "a:b", "--seed", 0) == 2


def test_budget_below_minimum_is_a_config_error(tmp_path):
    assert run_cli("gt", "run", "--n", 16, "--b", 1, "--seed", 0, "--out", tmp_path / "r.json") == 2


def test_sweep_writes_header_and_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run_cli("gt", "sweep", "--n", 64, "--budgets", "2:10", "--trials", 40, "--seed", 7, "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 10
    rows = list(csv.DictReader(lines))
    assert tuple(rows[0]) == SWEEP_FIELDS
    assert [int(r["b"]) for r in rows] == list(range(2, 11))
    assert all(int(r["bob_bits_max"]) <= int(r["b"]) for r in rows)


def test_same_config_gives_identical_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run_cli("verify", "lemmas", "--which", "qic", "--trials", 3, "--seed", 2, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    for out in (c, d):
        assert run_cli("gt", "run", "--n", 32, "--b", 5, "--trials", 30, "--seed", 2, "--out", out) == 0
    assert c.read_bytes() == d.read_bytes()


def test_json_envelope(tmp_path):
    out = tmp_path / "report.json"
    assert run_cli("verify", "lemmas", "--which", "shearer", "--trials", 10, "--seed", 1, "--out", out) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"version", "config", "payload", "pass"}
    assert data["version"] == __version__
    assert data["config"]["command"] == "verify lemmas"
    assert data["config"]["seed"] == 1
    (report,) = data["payload"]
    assert report["max_violation"] <= 1e-8 and report["pass"]


def test_timestamps_are_opt_in(tmp_path):
    out = tmp_path / "t.json"
    assert run_cli("pj", "check-marginals", "--k", 2, "--n", 1, "--timestamps", "--out", out) == 0
    data = json.loads(out.read_text())
    assert {"started", "finished"} <= set(data)
    assert data["payload"] == {"marginals_equal": True}


def test_csv_on_verification_payload_is_rejected(tmp_path):
    out = tmp_path / "lemmas.csv"
    assert run_cli("verify", "lemmas", "--which", "qic", "--trials", 2, "--seed", 0, "--out", out) == 2
    assert run_cli("pj", "run", "--k", 2, "--n", 2, "--trials", 2, "--seed", 0, "--format", "csv") == 2


def test_seed_from_environment(monkeypatch, tmp_path):
    env_out, flag_out = tmp_path / "env.json", tmp_path / "flag.json"
    monkeypatch.setenv("CCLAB_SEED", "5")
    assert run_cli("pj", "sample", "--k", 2, "--n", 2, "--count", 2, "--out", env_out) == 0
    assert json.loads(env_out.read_text())["config"]["seed"] == 5
    # the flag wins over the environment
    assert run_cli("pj", "sample", "--k", 2, "--n", 2, "--count", 2, "--seed", 6, "--out", flag_out) == 0
    assert json.loads(flag_out.read_text())["config"]["seed"] == 6


def test_tolerance_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("CCLAB_TOL", "0.5")
    assert run_cli("verify", "qmath", "--names", "araki_lieb", "--trials", 3, "--seed", 0) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["config"]["tol"] == 0.5


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv("CCLAB_SEED", "abc")
    assert run_cli("pj", "sample", "--k", 2, "--n", 2) == 2


def test_dimension_cap_from_environment(monkeypatch):
    from cclab.qmath.registers import dim_cap, set_dim_cap

    before = dim_cap()
    monkeypatch.setenv("CCLAB_DIM_CAP", "4")
    try:
        assert run_cli("verify", "lemmas", "--which", "qic", "--trials", 2, "--seed", 0) == 2
    finally:
        set_dim_cap(before)


def test_failed_check_exits_one_and_still_reports(tmp_path, capsys):
    out = tmp_path / "q.json"
    assert run_cli("verify", "qmath", "--names", "pinsker_sqrt_d", "--trials", 1000, "--seed", 0, "--out", out) == 1
    data = json.loads(out.read_text())
    assert data["pass"] is False
    assert data["payload"][0]["max_violation"] > 1e-8
    assert "failed" in capsys.readouterr().err


def test_pointer_jumping_commands(capsys):
    assert run_cli("pj", "run", "--k", 3, "--n", 3, "--trials", 20, "--seed", 0) == 0
    payload = json.loads(capsys.readouterr().out)["payload"]
    assert payload["bits"] == [payload["expected_bits"]] == [13]
    assert payload["error_rate"] == 0
    assert run_cli("pj", "enumerate", "--k", 2, "--n", 1, "--dist", "mu1") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["pass"]


def test_info_check_command(capsys):
    assert run_cli("gt", "info-check", "--n", 4, "--seed", 0) == 0
    payload = json.loads(capsys.readouterr().out)["payload"]
    assert all(row["lhs"] <= row["rhs"] + 1e-10 for row in payload)


def test_unwritable_output_is_a_usage_error(tmp_path):
    assert run_cli("pj", "check-marginals", "--k", 2, "--n", 1, "--out", tmp_path / "missing" / "x.json") == 2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "cclab.cli", "pj", "sample", "--k", "2"], capture_output=True, text=True
    )
    assert res.returncode == 2


def test_version_flag(capsys):
    assert run_cli("--version") == 0
    assert __version__ in capsys.readouterr().out
