import json

import numpy as np
import pytest

from unlearn_forge.checkpoints import load_checkpoint
from unlearn_forge.cli import cli


@pytest.fixture()
def runs_dir(tmp_path, monkeypatch):
    root = tmp_path / "runs"
    monkeypatch.setenv("UNLEARN_FORGE_RUNS_DIR", str(root))
    monkeypatch.chdir(tmp_path)
    return root


def _one(pattern, runs_dir):
    hits = sorted(runs_dir.glob(pattern))
    assert hits, f"no artifact matching {pattern}"
    return hits[-1]


def test_pipeline_through_cli(runs_dir, tmp_path, capsys):
    data = tmp_path / "data.uds"
    assert cli(["gen-data", "--seed", "1", "--classes", "3", "--features", "4",
                "--n-per-class", "40", "--separation", "3", "--noise-sd", "1",
                "--out", str(data)]) == 0
    assert data.exists()

    assert cli(["train", "--seed", "1", "--data", str(data),
                "--model", "mlp:4,8,3", "--epochs", "40"]) == 0
    ckpt = _one("*/checkpoints/original.ieuc", runs_dir)
    assert load_checkpoint(ckpt).role == "original"

    assert cli(["retrain", "--seed", "1", "--data", str(data),
                "--ckpt", str(ckpt)]) == 0
    retrain = _one("*/checkpoints/retrain.ieuc", runs_dir)

    assert cli(["unlearn", "--seed", "1", "--data", str(data), "--ckpt", str(ckpt),
                "--method", "ieu", "--alpha", "0.999", "--c", "0.01",
                "--eta", "0.05", "--epochs", "10"]) == 0
    unlearned = _one("*/checkpoints/ieu.ieuc", runs_dir)

    assert cli(["rcd", "--seed", "1", "--data", str(data), "--ckpt", str(unlearned),
                "--k", "10", "--phi", "loss", "--step", "fixed:0.05"]) == 0
    rcd_json = _one("*/reports/rcd.json", runs_dir)
    payload = json.loads(rcd_json.read_text())
    assert len(payload["errors"]) == 11

    assert cli(["eval", "--data", str(data), "--ckpt", str(unlearned),
                "--against", str(retrain)]) == 0
    ev = _one("*/reports/eval.json", runs_dir)
    capsys.readouterr()
    assert cli(["compare", str(ev), str(ev), "--format", "csv"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0].startswith("report,")
    assert len(out) == 3

    # every run directory carries a manifest with the resolved config
    manifest = json.loads(_one("*/manifest.json", runs_dir).read_text())
    assert {"command", "config", "experiment_id", "seed", "artifacts"} <= set(manifest)


def test_config_file_precedence(runs_dir, tmp_path):
    data = tmp_path / "d.uds"
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"classes": 5, "features": 3,
                                    "n_per_class": 20, "out": str(data)}))
    # CLI flag overrides the config file's classes=5
    assert cli(["gen-data", "--seed", "2", "--config", str(cfg_file),
                "--classes", "4"]) == 0
    manifest = json.loads(_one("*/manifest.json", runs_dir).read_text())
    assert manifest["config"]["classes"] == 4
    assert manifest["config"]["features"] == 3

    from unlearn_forge.datasets import load_uds

    assert load_uds(data).num_classes == 4


def test_usage_errors_exit_one(runs_dir, capsys):
    assert cli(["train", "--seed", "0"]) == 1  # missing --data/--model
    assert cli(["definitely-not-a-command"]) == 1
    assert cli(["unlearn", "--seed", "0", "--data", "x.uds", "--ckpt", "y",
                "--method", "warp"]) == 1
    assert cli([]) == 1
    capsys.readouterr()


def test_missing_seed_is_usage_error(runs_dir, capsys):
    assert cli(["gen-data", "--classes", "3"]) == 1
    capsys.readouterr()


def test_experiment_id_is_config_hash(runs_dir, tmp_path):
    out1 = tmp_path / "a.uds"
    out2 = tmp_path / "b.uds"
    cli(["gen-data", "--seed", "3", "--out", str(out1)])
    cli(["gen-data", "--seed", "4", "--out", str(out2)])
    ids = {p.name for p in runs_dir.iterdir()}
    assert len(ids) == 2  # different seed, different experiment id


def test_verify_fast_subset(runs_dir, monkeypatch, capsys):
    # stub the suite to keep this test quick; exit-code logic is the target
    import unlearn_forge.cli as cli_mod
    from unlearn_forge.verify import CheckResult, SuiteReport

    def fake_suite(full, reproducibility):
        return SuiteReport(results=[CheckResult(name="stub", passed=True, margin=1.0)])

    monkeypatch.setattr(cli_mod.verify_mod, "run_suite", fake_suite)
    assert cli(["verify", "--fast", "--no-repro"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out

    def failing_suite(full, reproducibility):
        return SuiteReport(results=[CheckResult(name="stub", passed=False, margin=-1.0)])

    monkeypatch.setattr(cli_mod.verify_mod, "run_suite", failing_suite)
    assert cli(["verify", "--fast", "--no-repro"]) == 2


def test_verify_writes_report(runs_dir, tmp_path, monkeypatch):
    import unlearn_forge.cli as cli_mod
    from unlearn_forge.verify import CheckResult, SuiteReport

    monkeypatch.setattr(
        cli_mod.verify_mod, "run_suite",
        lambda full, reproducibility: SuiteReport(
            results=[CheckResult(name="stub", passed=True, margin=0.5)]))
    out = tmp_path / "verify.json"
    assert cli(["verify", "--fast", "--no-repro", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["all_passed"] is True
