import json

import numpy as np
import pandas as pd
import pytest

from credit_explainer.cli import run_command

SMALL_RUN = {
    "seed": 7,
    "models.boosted.n_rounds": 10,
    "models.boosted.max_depth": 3,
    "lime.n_samples": 500,
    "shap.background_k": 5,
    "shap.n_coalitions": 128,
    "shap.n_explain": 10,
    "ale.n_intervals": 5,
}


def pipeline(root, config_path, rows=800):
    data = root / "loans.csv"
    assert run_command(["--root", str(root), "synth", "--rows", str(rows), "--out", str(data), "--config", str(config_path)]) == 0
    schema = root / "loans.schema.json"
    assert run_command(["--root", str(root), "--config", str(config_path), "prep", "--in", str(data), "--schema", str(schema)]) == 0
    assert run_command(["--root", str(root), "--config", str(config_path), "train", "--kind", "boosted"]) == 0
    return root


@pytest.fixture(scope="module")
def small_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("config") / "run.json"
    path.write_text(json.dumps(SMALL_RUN))
    return path


@pytest.fixture(scope="module")
def trained_root(tmp_path_factory, small_config):
    return pipeline(tmp_path_factory.mktemp("run"), small_config)


def test_prep_writes_splits_and_manifest(trained_root):
    train = pd.read_csv(trained_root / "encoded" / "train.csv")
    test = pd.read_csv(trained_root / "encoded" / "test.csv")
    report = json.loads((trained_root / "encoded" / "preprocess.json").read_text())
    removed = sum(step["removed_rows"] for step in report["steps"])
    assert len(train) + len(test) == report["n_rows"] == 800 - removed
    assert "target" in train.columns
    manifest = json.loads((trained_root / "manifests" / "prep.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["config"]["seed"] == 7
    assert any(path.endswith("train.csv") for path in manifest["outputs"])


def test_shap_rows_are_locally_accurate(trained_root, small_config):
    assert run_command(["--root", str(trained_root), "--config", str(small_config), "explain", "shap", "--n", "10"]) == 0
    phi = pd.read_csv(trained_root / "explanations" / "boosted_shap.csv", float_precision="round_trip")
    assert len(phi) == 10
    features = [c for c in phi.columns if c not in ("base_value", "fx")]
    residual = phi["base_value"] + phi[features].sum(axis=1) - phi["fx"]
    assert np.abs(residual).max() < 1e-6
    document = json.loads((trained_root / "explanations" / "boosted_shap.json").read_text())
    assert document["phi"] == phi[features].to_numpy().tolist()
    timings = pd.read_csv(trained_root / "explanations" / "boosted_shap_timings.csv")
    assert len(timings) == 10


def test_lime_explanation_size(trained_root, small_config, capsys):
    code = run_command(
        ["--root", str(trained_root), "--config", str(small_config), "explain", "lime", "--instance", "5", "--k", "10"]
    )
    assert code == 0
    batch = json.loads((trained_root / "explanations" / "boosted_lime.json").read_text())
    assert batch["explanations"][0]["instance_id"] == 5
    assert len(batch["explanations"][0]["entries"]) == 10
    assert "-- Default --" in capsys.readouterr().out


def test_report_views_after_shap(trained_root, small_config):
    assert run_command(["--root", str(trained_root), "--config", str(small_config), "explain", "shap"]) == 0
    for view in ("summary", "dependence", "force", "compare"):
        assert run_command(["--root", str(trained_root), "--config", str(small_config), "report", view]) == 0
        assert (trained_root / "reports" / f"boosted_shap_{view}.json").exists()


def test_ale_curves_written(trained_root, small_config):
    code = run_command(
        ["--root", str(trained_root), "--config", str(small_config), "ale", "--features", "recoveries", "--link", "logit"]
    )
    assert code == 0
    report = json.loads((trained_root / "explanations" / "boosted_ale.json").read_text())
    assert [c["feature"] for c in report["curves"]] == ["recoveries"]
    assert report["link"] == "logit"
    table = pd.read_csv(trained_root / "explanations" / "boosted_ale.csv")
    assert set(table["feature"]) == {"recoveries"}
    assert len(table) == len(report["curves"][0]["effects"])


def test_same_seed_same_bytes(tmp_path, small_config):
    first, second = tmp_path / "a", tmp_path / "b"
    first.mkdir()
    second.mkdir()
    for root in (first, second):
        pipeline(root, small_config, rows=400)
        assert run_command(["--root", str(root), "--config", str(small_config), "explain", "shap", "--jobs", "2"]) == 0
    for relative in ("loans.csv", "encoded/train.csv", "models/boosted.json", "explanations/boosted_shap.csv"):
        assert (first / relative).read_bytes() == (second / relative).read_bytes()


def test_missing_artifact_exits_one(tmp_path, small_config, capsys):
    code = run_command(["--root", str(tmp_path), "--config", str(small_config), "train", "--kind", "boosted"])
    assert code == 1
    records = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    record = json.loads(records[-1])
    assert record["code"] == "MISSING_ARTIFACT"
    assert record["command"] == "train"
    assert (tmp_path / "manifests" / "error.json").exists()


def test_bad_usage_exits_two(tmp_path, trained_root, small_config):
    assert run_command(["--root", str(tmp_path), "train", "--kind", "perceptron"]) == 2
    bad_instance = ["--root", str(trained_root), "--config", str(small_config), "explain", "lime", "--instance", "100000"]
    assert run_command(bad_instance) == 2
    unknown_feature = ["--root", str(trained_root), "--config", str(small_config), "ale", "--features", "nope"]
    assert run_command(unknown_feature) == 2


def test_missing_input_file_exits_one_with_record(tmp_path, capsys):
    missing = str(tmp_path / "absent.csv")
    code = run_command(["--root", str(tmp_path), "prep", "--in", missing, "--schema", str(tmp_path / "absent.json")])
    assert code == 1
    records = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    assert json.loads(records[-1])["code"] == "IO_ERROR"
    stored = json.loads((tmp_path / "manifests" / "error.json").read_text())
    assert stored["command"] == "prep"
    assert stored["detail"].endswith("absent.json")


def test_usage_error_writes_record(tmp_path, capsys):
    assert run_command(["--root", str(tmp_path), "train", "--kind", "perceptron"]) == 2
    stored = json.loads((tmp_path / "manifests" / "error.json").read_text())
    assert stored["code"] == "USAGE"
    assert stored["command"] == "train"
    assert "perceptron" in stored["error"]
    assert "usage:" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert run_command(["--help"]) == 0
    assert "credit-explainer" in capsys.readouterr().out
