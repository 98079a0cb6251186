"""
End-to-end tests of the command-line interface.
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

from survforest.main import app
from survforest.schemas.experiment import RunManifest, StageStatus
from survforest.services.io_service import read_weights

cli = CliRunner()

SMALL_RUN = [
    "--set", "sim.n=80",
    "--set", "rsf.n_trees=5",
    "--set", "sbrsf.global.n_trees=5",
    "--set", "sbrsf.per_case.n_trees=3",
]  # fmt: skip


def _invoke(*args):
    return cli.invoke(app, [str(a) for a in args])


def _csv_bytes(out: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    config = Path(__file__).resolve().parents[1] / "configs" / "experiment_example1.env"
    result = _invoke("run", "--config", config, "--out", out, *SMALL_RUN)
    assert result.exit_code == 0, result.output
    return out


# ==================== simulate ====================


def test_simulate_writes_dataset_and_is_reproducible(config_dir, tmp_path):
    args = ("simulate", "--config", config_dir / "example1.env", "--set", "sim.n=60")
    first = _invoke(*args, "--out", tmp_path / "a")
    assert first.exit_code == 0, first.output
    assert _invoke(*args, "--out", tmp_path / "b").exit_code == 0

    data = pd.read_csv(tmp_path / "a" / "dataset.csv")
    assert len(data) == 60
    assert list(data.columns) == ["id", "time", "event", "x1", "x2", "x3"]
    assert len(pd.read_csv(tmp_path / "a" / "oracle.csv")) == 60
    assert (tmp_path / "a" / "sim_config.env").is_file()
    assert _csv_bytes(tmp_path / "a") == _csv_bytes(tmp_path / "b")


def test_simulate_seed_option_changes_data(config_dir, tmp_path):
    args = ("simulate", "--config", config_dir / "example2.env", "--set", "sim.n=30")
    _invoke(*args, "--out", tmp_path / "a", "--seed", "1")
    _invoke(*args, "--out", tmp_path / "b", "--seed", "2")
    assert _csv_bytes(tmp_path / "a")["dataset.csv"] != _csv_bytes(tmp_path / "b")["dataset.csv"]


def test_simulate_rejects_empty_dataset(config_dir, tmp_path):
    result = _invoke("simulate", "--config", config_dir / "example1.env", "--set", "sim.n=0", "--out", tmp_path)
    assert result.exit_code == 1


# ==================== run ====================


def test_run_outputs_and_manifest(small_run):
    for name in [
        "dataset.csv", "oracle.csv", "train.csv", "test.csv",
        "predictions_rsf.csv", "predictions_sbrsf.csv",
        "auc_rsf.csv", "auc_sbrsf.csv", "comparison.csv", "summary.csv", "auc.svg",
    ]:  # fmt: skip
        assert (small_run / name).is_file(), name
    assert not (small_run / ".staging").exists()

    manifest = RunManifest.load(small_run / "manifest.json")
    assert manifest.status == StageStatus.SUCCEEDED
    assert [s.name for s in manifest.stages] == ["config", "data", "rsf", "sbrsf", "evaluate"]
    on_disk = {p.name for p in small_run.iterdir() if p.is_file()} - {"manifest.json"}
    assert {o.path for o in manifest.outputs} == on_disk
    assert manifest.seeds["master"] == 1
    assert manifest.config["sim.n"] == "80"

    auc = pd.read_csv(small_run / "auc_sbrsf.csv")
    assert list(auc["t"]) == list(np.arange(1.0, 21.0))
    assert len(pd.read_csv(small_run / "train.csv")) == 56


def test_run_from_manifest_reproduces_outputs(small_run, tmp_path):
    result = _invoke("run", "--from-manifest", small_run / "manifest.json", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert _csv_bytes(tmp_path) == _csv_bytes(small_run)


def test_run_is_independent_of_worker_count(small_run, config_dir, tmp_path):
    config = config_dir / "experiment_example1.env"
    result = _invoke("run", "--config", config, "--out", tmp_path, "--workers", "2", *SMALL_RUN)
    assert result.exit_code == 0, result.output
    assert _csv_bytes(tmp_path) == _csv_bytes(small_run)


def test_run_from_manifest_rejects_extra_options(small_run, tmp_path):
    result = _invoke("run", "--from-manifest", small_run / "manifest.json", "--seed", "3", "--out", tmp_path)
    assert result.exit_code == 1


def test_dependent_censoring_run_adds_ipcw_stage(config_dir, tmp_path):
    config = config_dir / "experiment_dependent.env"
    result = _invoke("run", "--config", config, "--out", tmp_path, *SMALL_RUN)
    assert result.exit_code == 0, result.output
    manifest = RunManifest.load(tmp_path / "manifest.json")
    assert manifest.stage("ipcw") is not None
    ipcw = pd.read_csv(tmp_path / "ipcw.csv")
    assert (ipcw["ipcw"] >= 1.0).all()


def test_failed_run_is_quarantined(config_dir, tmp_path):
    config = config_dir / "experiment_example1.env"
    result = _invoke("run", "--config", config, "--out", tmp_path, *SMALL_RUN, "--set", "rsf.tree.d0=1000")
    assert result.exit_code == 1
    manifest = RunManifest.load(tmp_path / "manifest.json")
    assert manifest.status == StageStatus.FAILED
    assert manifest.stage("rsf").status == StageStatus.FAILED
    assert manifest.stage("rsf").error
    assert (tmp_path / "quarantine" / "train.csv").is_file()
    assert not (tmp_path / "train.csv").exists()
    assert "quarantine/train.csv" in {o.path for o in manifest.outputs}


def _files_under(root: Path) -> set:
    return {p.relative_to(root).as_posix() for p in root.rglob("*") if p.is_file()} - {"manifest.json"}


def test_rerun_replaces_previous_outputs(config_dir, tmp_path):
    dependent = _invoke("run", "--config", config_dir / "experiment_dependent.env", "--out", tmp_path, *SMALL_RUN)
    assert dependent.exit_code == 0, dependent.output
    assert (tmp_path / "ipcw.csv").is_file()

    plain = _invoke("run", "--config", config_dir / "experiment_example1.env", "--out", tmp_path, *SMALL_RUN)
    assert plain.exit_code == 0, plain.output
    assert not (tmp_path / "ipcw.csv").exists()
    assert _files_under(tmp_path) == {o.path for o in RunManifest.load(tmp_path / "manifest.json").outputs}


def test_failed_rerun_leaves_no_earlier_outputs(config_dir, tmp_path):
    config = config_dir / "experiment_dependent.env"
    assert _invoke("run", "--config", config, "--out", tmp_path, *SMALL_RUN).exit_code == 0

    failed = _invoke(
        "run", "--config", config_dir / "experiment_example1.env", "--out", tmp_path, *SMALL_RUN,
        "--set", "rsf.tree.d0=1000",
    )  # fmt: skip
    assert failed.exit_code == 1
    manifest = RunManifest.load(tmp_path / "manifest.json")
    assert manifest.status == StageStatus.FAILED
    on_disk = _files_under(tmp_path)
    assert on_disk == {o.path for o in manifest.outputs}
    assert all(path.startswith("quarantine/") for path in on_disk)


def test_run_rejects_bad_config(tmp_path):
    result = _invoke("run", "--out", tmp_path, "--set", "data.source=csv")
    assert result.exit_code == 1


# ==================== fit / predict / evaluate / compare ====================


def test_evaluate_reproduces_run_auc(small_run, tmp_path):
    result = _invoke(
        "evaluate", "--predictions", small_run / "predictions_rsf.csv", "--test", small_run / "test.csv",
        "--grid", "1:20:1", "--out", tmp_path,
    )  # fmt: skip
    assert result.exit_code == 0, result.output
    assert (tmp_path / "auc.csv").read_bytes() == (small_run / "auc_rsf.csv").read_bytes()


def test_evaluate_rejects_unrelated_ids(tmp_path):
    predictions = tmp_path / "predictions.csv"
    predictions.write_text("test_id,time,chf,survival\nzz,1,0.1,0.9\n", encoding="utf-8")
    test = tmp_path / "test.csv"
    test.write_text("id,time,event,x1\na,1,1,0\n", encoding="utf-8")
    result = _invoke("evaluate", "--predictions", predictions, "--test", test, "--out", tmp_path / "out")
    assert result.exit_code == 1


def test_predict_matches_run_predictions(small_run, tmp_path):
    result = _invoke(
        "predict", "--train", small_run / "train.csv", "--test", small_run / "test.csv",
        "--method", "rsf", "--seed", "1", "--set", "rsf.n_trees=5", "--out", tmp_path,
    )  # fmt: skip
    assert result.exit_code == 0, result.output
    assert (tmp_path / "predictions.csv").read_bytes() == (small_run / "predictions_rsf.csv").read_bytes()


def test_fit_writes_normalized_weights(small_run, tmp_path):
    result = _invoke(
        "fit", "--train", small_run / "train.csv", "--test", small_run / "test.csv",
        "--seed", "1", "--set", "sbrsf.global.n_trees=5", "--set", "sbrsf.dependent_censoring=true",
        "--out", tmp_path,
    )  # fmt: skip
    assert result.exit_code == 0, result.output
    weights, train_ids, test_ids = read_weights(tmp_path / "weights.csv")
    assert weights.shape == (56, 24)
    assert np.allclose(weights.weights.sum(axis=0), 1.0, atol=1e-12)
    assert test_ids == list(pd.read_csv(small_run / "test.csv", dtype={"id": str})["id"])
    assert (tmp_path / "ipcw.csv").is_file()


def test_compare_writes_table_and_plot(small_run, tmp_path):
    result = _invoke("compare", "--a", small_run / "auc_sbrsf.csv", "--b", small_run / "auc_rsf.csv", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "comparison.csv").read_bytes() == (small_run / "comparison.csv").read_bytes()
    summary = pd.read_csv(tmp_path / "summary.csv")
    assert {"iauc_sbrsf", "iauc_rsf", "mean_diff", "fraction_wins"} <= set(summary.columns)
    assert (tmp_path / "auc.svg").read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_compare_labels_from_config(small_run, tmp_path):
    config = tmp_path / "labels.env"
    config.write_text("compare.a=weighted\ncompare.b=plain\n", encoding="utf-8")
    result = _invoke(
        "compare", "--a", small_run / "auc_sbrsf.csv", "--b", small_run / "auc_rsf.csv",
        "--config", config, "--seed", "4", "--out", tmp_path / "out",
    )  # fmt: skip
    assert result.exit_code == 0, result.output
    summary = pd.read_csv(tmp_path / "out" / "summary.csv")
    assert {"iauc_weighted", "iauc_plain"} <= set(summary.columns)
    manifest = RunManifest.load(tmp_path / "out" / "manifest.json")
    assert manifest.config == {"compare.a": "weighted", "compare.b": "plain"}
    assert manifest.seeds == {"master": 4}


def test_compare_rejects_equal_labels(small_run, tmp_path):
    result = _invoke(
        "compare", "--a", small_run / "auc_sbrsf.csv", "--b", small_run / "auc_rsf.csv",
        "--label-a", "x", "--label-b", "x", "--out", tmp_path,
    )  # fmt: skip
    assert result.exit_code == 1


def test_evaluate_records_seed_and_workers(small_run, tmp_path):
    result = _invoke(
        "evaluate", "--predictions", small_run / "predictions_sbrsf.csv", "--test", small_run / "test.csv",
        "--seed", "9", "--workers", "3", "--out", tmp_path,
    )  # fmt: skip
    assert result.exit_code == 0, result.output
    manifest = RunManifest.load(tmp_path / "manifest.json")
    assert manifest.seeds == {"master": 9}
    assert manifest.workers == 3
