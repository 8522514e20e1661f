import json

import pytest

from gspto import cli
from gspto.verify import CheckResult

TINY_RUN = """
objective:
  name: ackley
optimizer:
  algorithm: epgs
  power: 1.0
  sigma: 1.0
  samples: 20
  updates: 8
  schedule: {kind: constant, alpha0: 0.1}
  init: {kind: gaussian, center: [5.0, 5.0], cov_scale: 0.01}
experiment:
  trials: 2
  seed: 1
  label: tiny
"""

TINY_SWEEP = """
objective:
  name: two_log
  dimension: 2
optimizer:
  algorithm: epgs
  power: 1.0
  sigma: 0.5
  samples: 20
  updates: 8
  schedule: {kind: constant, alpha0: 0.1}
  init: {kind: uniform, low: -1.0, high: 1.0}
experiment:
  trials: 2
  seed: 1
  sweep: [1.0, 2.0]
  label: tinysweep
"""

TINY_ATTACK = """
objective:
  name: affine_attack
  dimension: 8
optimizer:
  algorithm: epgs
  power: 0.02
  sigma: 0.1
  samples: 30
  updates: 40
  schedule: {kind: constant, alpha0: 0.1}
experiment:
  trials: 2
  seed: 1
  label: tinyattack
attack:
  kappa: 0.01
  lam: 1.0
  classes: 3
"""

ABORTING_RUN = """
objective:
  name: quadratic
  dimension: 1
optimizer:
  algorithm: pgs
  power: 2.0
  stable_weighting: false
  sigma: 1.0
  samples: 10
  updates: 5
  schedule: {kind: constant, alpha0: 0.1}
  init: {kind: fixed, point: [0.0]}
experiment:
  trials: 2
  label: aborts
"""


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_writes_reports_and_exits_zero(tmp_path, capsys):
    code = cli.main(["run", "--config", write(tmp_path, TINY_RUN), "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "tiny_trials.csv").exists()
    report = json.loads((tmp_path / "out" / "tiny_report.json").read_text())
    assert report["completed"] == 2
    assert "fitness" in capsys.readouterr().out


def test_run_overrides_seed_and_trials(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["run", "--config", write(tmp_path, TINY_RUN), "--out", str(out),
                     "--trials", "3", "--seed", "42"])
    assert code == 0
    report = json.loads((out / "tiny_report.json").read_text())
    assert report["meta"]["trials"] == 3
    assert report["meta"]["seed"] == 42


def test_run_partial_exits_one(tmp_path):
    code = cli.main(["run", "--config", write(tmp_path, ABORTING_RUN),
                     "--out", str(tmp_path / "out")])
    assert code == 1


def test_sweep_writes_trend(tmp_path):
    code = cli.main(["sweep", "--config", write(tmp_path, TINY_SWEEP),
                     "--out", str(tmp_path / "out")])
    assert code == 0
    trend = (tmp_path / "out" / "tinysweep_trend.csv").read_text().splitlines()
    assert len(trend) == 3


def test_attack_runs(tmp_path):
    code = cli.main(["attack", "--config", write(tmp_path, TINY_ATTACK),
                     "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "tinyattack_instances.csv").exists()


def test_missing_config_exits_two(tmp_path, capsys):
    code = cli.main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_unknown_key_exits_two(tmp_path):
    bad = TINY_RUN + "\nbogus: 1\n"
    code = cli.main(["run", "--config", write(tmp_path, bad), "--out", str(tmp_path)])
    assert code == 2


def test_default_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("GSPTO_OUTPUT_DIR", str(tmp_path / "envout"))
    code = cli.main(["run", "--config", write(tmp_path, TINY_RUN)])
    assert code == 0
    assert (tmp_path / "envout" / "tiny_trials.csv").exists()


def test_verify_exit_codes(monkeypatch, capsys):
    monkeypatch.setattr(cli.verify, "run_all",
                        lambda: [CheckResult("a", True, "ok"), CheckResult("b", True, "ok")])
    assert cli.main(["verify"]) == 0
    assert "[PASS] a" in capsys.readouterr().out
    monkeypatch.setattr(cli.verify, "run_all",
                        lambda: [CheckResult("a", True, "ok"), CheckResult("b", False, "bad")])
    assert cli.main(["verify"]) == 1
    assert "[FAIL] b" in capsys.readouterr().out


def test_preset_name_resolution(tmp_path):
    # bare preset names resolve through the packaged presets directory
    code = cli.main(["run", "--config", "ackley_epgs", "--out", str(tmp_path / "o"),
                     "--trials", "1"])
    assert code == 0
    assert (tmp_path / "o" / "ackley_epgs_trials.csv").exists()


def test_console_script_installed():
    import shutil
    import subprocess

    if shutil.which("gspto") is None:
        pytest.skip("console script not on PATH")
    result = subprocess.run(["gspto", "--help"], capture_output=True, text=True)
    assert result.returncode == 0
    assert "run" in result.stdout and "verify" in result.stdout
