"""
End-to-end tests of the command-line pipeline on a small synthetic dataset.
"""

import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from src.main import app
from src.services.training_service import fold_seed
from src.tools import dataset_io

runner = CliRunner()

RUN_CONFIG = {
    "network": {"kind": "mlp", "hidden": [8]},
    "synthetic": {"counts": [30, 24, 12, 6], "separation": 3.0},
    "split": {"n_splits": 3},
    "dl": {"epochs": 2},
    "cdr": {"episodes": 1, "batch_size": 10, "replay_capacity": 100},
}


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth → split → train-dl over two folds; paths shared by the tests below."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps(RUN_CONFIG))

    result = invoke("synth", "--out", root / "synth", "--seed", 1, "--config", config)
    assert result.exit_code == 0, result.output
    dataset = root / "synth" / "dataset.csv"

    result = invoke("split", "--dataset", dataset, "--out", root / "split", "--config", config)
    assert result.exit_code == 0, result.output
    splits = root / "split" / "splits.json"

    result = invoke(
        "train-dl",
        "--dataset", dataset,
        "--splits", splits,
        "--folds", 2,
        "--config", config,
        "--out", root / "dl",
    )  # fmt: skip
    assert result.exit_code == 0, result.output
    return {"root": root, "config": config, "dataset": dataset, "splits": splits}


class TestPipeline:
    def test_synth_and_split_outputs(self, pipeline):
        records = dataset_io.load_csv(pipeline["dataset"])
        assert len(records) == 72
        assert len(dataset_io.read_split_manifest(pipeline["splits"])) == 3
        sizes = pd.read_csv(pipeline["root"] / "split" / "split_sizes.csv")
        assert len(sizes) == 9
        assert (pipeline["root"] / "split" / "manifest.json").exists()

    def test_training_run_layout(self, pipeline):
        run = pipeline["root"] / "dl"
        for fold in (0, 1):
            assert (run / f"fold_{fold}" / "model.json").exists()
            assert len(pd.read_csv(run / f"fold_{fold}" / "train_log.csv")) == 2
        assert pd.read_csv(run / "fold_metrics.csv")["fold"].tolist() == [0, 1]
        summary = json.loads((run / "summary.json").read_text())
        assert summary["metrics"]["tss"]["n"] == 2
        manifest = json.loads((run / "manifest.json").read_text())
        assert manifest["run"]["command"] == "train-dl"

    def test_eval_reproduces_training_metrics(self, pipeline):
        out = pipeline["root"] / "eval"
        result = invoke(
            "eval",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--run", pipeline["root"] / "dl",
            "--out", out,
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        trained = pd.read_csv(pipeline["root"] / "dl" / "fold_metrics.csv")
        scored = pd.read_csv(out / "fold_metrics.csv")
        assert scored["tss"].tolist() == trained["tss"].tolist()
        assert scored["bss"].tolist() == trained["bss"].tolist()

    def test_scan(self, pipeline):
        out = pipeline["root"] / "scan"
        result = invoke(
            "scan",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--run", pipeline["root"] / "dl",
            "--out", out,
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        assert len(pd.read_csv(out / "scan.csv")) == 101
        best = json.loads((out / "best_threshold.json").read_text())
        assert 0 <= best["threshold_pct"] <= 100

    def test_train_cdr_single_split(self, pipeline):
        out = pipeline["root"] / "cdr"
        result = invoke(
            "train-cdr",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--config", pipeline["config"],
            "--out", out,
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        assert (out / "fold_0" / "model.json").exists()
        assert not (out / "summary.json").exists()
        log = pd.read_csv(out / "fold_0" / "train_log.csv")
        assert log["epsilon"].tolist() == [0.99]

    def test_explain(self, pipeline):
        out = pipeline["root"] / "explain"
        result = invoke(
            "explain",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--model", pipeline["root"] / "dl" / "fold_0" / "model.json",
            "--limit", 2,
            "--out", out,
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        efficiency = pd.read_csv(out / "efficiency.csv")
        assert len(efficiency) == 2
        assert (efficiency["phi0"] + efficiency["sum_phi"] - efficiency["f_x"]).abs().max() < 1e-9
        assert len(pd.read_csv(out / "global_importance.csv")) == 10
        assert len(pd.read_csv(out / "attributions.csv")) == 20

    def test_compare(self, pipeline):
        records = dataset_io.load_csv(pipeline["dataset"])
        external = pipeline["root"] / "external.csv"
        pd.DataFrame(
            {
                "ar_id": [r.ar_id for r in records],
                "probability": [0.9 if r.label else 0.1 for r in records],
                "label": [r.label for r in records],
            }
        ).to_csv(external, index=False)

        out = pipeline["root"] / "compare"
        result = invoke(
            "compare",
            "--dataset", pipeline["dataset"],
            "--probabilities", external,
            "--run", pipeline["root"] / "dl",
            "--out", out,
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        blocks = json.loads((out / "compare.json").read_text())
        assert [b["name"] for b in blocks] == ["original", "filtered"]
        assert blocks[0]["external_best"]["tss"] == 1.0
        assert len(pd.read_csv(out / "compare_filtered.csv")) == 101


class TestTTestCommand:
    def test_writes_both_metrics(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        pd.DataFrame({"fold": [0, 1, 2], "tss": [0.8, 0.85, 0.9], "bss": [0.3, 0.4, 0.2]}).to_csv(
            a, index=False
        )
        pd.DataFrame({"fold": [0, 1, 2], "tss": [0.7, 0.8, 0.7], "bss": [0.3, 0.1, 0.25]}).to_csv(
            b, index=False
        )
        result = invoke("ttest", "--a", a, "--b", b, "--out", tmp_path / "t")
        assert result.exit_code == 0, result.output
        payload = json.loads((tmp_path / "t" / "ttest.json").read_text())
        assert set(payload) == {"bss", "tss"}
        assert payload["tss"]["df"] == 2


class TestErrors:
    def test_missing_dataset_is_a_data_error(self, tmp_path):
        result = invoke("split", "--dataset", tmp_path / "absent.csv", "--out", tmp_path)
        assert result.exit_code == 2
        assert "ingestion_error" in result.output

    def test_bad_config_is_a_config_error(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text('{"cdr": {"batch_size": 50, "replay_capacity": 10}}')
        result = invoke("synth", "--config", config, "--out", tmp_path)
        assert result.exit_code == 1
        assert "config_error" in result.output

    def test_model_and_run_are_exclusive(self, pipeline, tmp_path):
        result = invoke(
            "eval",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--out", tmp_path,
        )  # fmt: skip
        assert result.exit_code == 1

    def test_show_config(self):
        result = invoke("show-config")
        assert result.exit_code == 0
        assert '"transformer"' in result.output


class TestSweepCommand:
    def test_tp_sweep(self, pipeline):
        out = pipeline["root"] / "sweep"
        result = invoke(
            "sweep",
            "--which", "tp",
            "--range", "5:15",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--folds", 1,
            "--config", pipeline["config"],
            "--out", out,
        )  # fmt: skip
        assert result.exit_code == 0, result.output
        table = pd.read_csv(out / "sweep.csv")
        assert table["TP"].tolist() == [float(v) for v in range(5, 16)]
        assert table.loc[table["base"] == 1, "TP"].tolist() == [10.0]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["run"]["options"]["which"] == "TP"

    def test_unknown_preset(self, pipeline, tmp_path):
        result = invoke(
            "sweep",
            "--which", "TP",
            "--range", "5:15",
            "--base", "lstm",
            "--dataset", pipeline["dataset"],
            "--splits", pipeline["splits"],
            "--out", tmp_path,
        )  # fmt: skip
        assert result.exit_code == 1


def _run_pipeline(root, config):
    """synth → split → train-dl / train-cdr → eval → ttest, all seeded."""
    dataset = root / "synth" / "dataset.csv"
    splits = root / "split" / "splits.json"
    commands = [
        ("synth", "--out", root / "synth", "--seed", 7, "--config", config),
        ("split", "--dataset", dataset, "--out", root / "split", "--config", config),
        (
            "train-dl",
            "--dataset", dataset,
            "--splits", splits,
            "--folds", 2,
            "--seed", 3,
            "--config", config,
            "--out", root / "dl",
        ),
        (
            "train-cdr",
            "--dataset", dataset,
            "--splits", splits,
            "--seed", 3,
            "--config", config,
            "--out", root / "cdr",
        ),
        (
            "eval",
            "--dataset", dataset,
            "--splits", splits,
            "--run", root / "dl",
            "--out", root / "eval",
        ),
    ]  # fmt: skip
    for args in commands:
        result = invoke(*args)
        assert result.exit_code == 0, (args[0], result.output)

    trained = pd.read_csv(root / "dl" / "fold_metrics.csv")
    shifted = root / "shifted.csv"
    pd.DataFrame(
        {
            "fold": trained["fold"],
            "tss": trained["tss"] - [0.1, 0.3],
            "bss": trained["bss"] - [0.2, 0.05],
        }
    ).to_csv(shifted, index=False)
    a = root / "dl" / "fold_metrics.csv"
    result = invoke("ttest", "--a", a, "--b", shifted, "--out", root / "ttest")
    assert result.exit_code == 0, result.output
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestReproducibility:
    def test_same_seed_gives_identical_files(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps(RUN_CONFIG))
        root = tmp_path / "run"
        first = _run_pipeline(root, config)
        second = _run_pipeline(root, config)
        assert first.keys() == second.keys()
        for name in first:
            assert first[name] == second[name], name
        assert any(name.name == "manifest.json" for name in first)
        assert any(name.name == "fold_metrics.csv" for name in first)

    def test_downstream_manifests_record_the_training_seed(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps(RUN_CONFIG))
        root = tmp_path / "run"
        _run_pipeline(root, config)

        model_seeds = [
            json.loads((root / "dl" / f"fold_{fold}" / "model.json").read_text())["seed"]
            for fold in (0, 1)
        ]
        assert model_seeds == [fold_seed(3, 0), fold_seed(3, 1)]
        manifest = json.loads((root / "eval" / "manifest.json").read_text())
        assert manifest["run"]["seed"] == 3
        assert manifest["run"]["options"]["model_seeds"] == model_seeds

        manifest = json.loads((root / "ttest" / "manifest.json").read_text())
        assert manifest["run"]["seed"] == 3
        assert manifest["run"]["options"]["run_seeds"] == {"a": 3, "b": None}
