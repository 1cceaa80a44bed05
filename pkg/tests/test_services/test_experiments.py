"""
Tests for reward sweeps, external comparison, fold t-tests and explanations.
"""

import numpy as np
import pandas as pd
import pytest

from src.models.attribution import ShapConfig
from src.models.network import MLPConfig
from src.models.training import CDRConfig
from src.networks import MLPClassifier
from src.services import get_evaluation_service, get_explain_service, get_sweep_service
from src.services.evaluation_service import load_external_probabilities
from src.services.sweep_service import parse_range
from src.services.training_service import train_fold
from src.tools.splits import make_cv_splits, subset
from src.tools.standardize import fit_standardizer
from src.utils.errors import ConfigError, DataError, IngestionError

MLP = MLPConfig(T=40, F=10, hidden=[8])
QUICK_CDR = CDRConfig(episodes=1, batch_size=10, replay_capacity=100, learning_rate=1e-3)


class TestParseRange:
    def test_inclusive_unit_steps(self):
        assert parse_range("5:15") == [float(v) for v in range(5, 16)]

    def test_negative_with_step(self):
        assert parse_range("-25:-15:5") == [-25.0, -20.0, -15.0]

    @pytest.mark.parametrize("text", ["5", "a:b", "15:5", "1:2:0"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_range(text)


class TestSweep:
    def test_tp_sweep_has_eleven_rows_with_base_flagged(self, small_records, small_splits):
        service = get_sweep_service()
        table = service.sweep_rewards(
            QUICK_CDR, "TP", parse_range("5:15"), small_records, small_splits, MLP, seed=1
        )
        assert len(table.rows) == 11
        assert [row.value for row in table.rows if row.base] == [10.0]

        base_row = next(row for row in table.rows if row.base)
        plain = train_fold(small_records, small_splits[0], MLP, "cdr", QUICK_CDR, seed=1)
        assert base_row.tss.mean == plain.test_report.tss
        assert base_row.tss.std == 0.0

        frame = service.to_frame(table)
        assert list(frame.columns) == ["TP", "tss_mean", "tss_std", "bss_mean", "bss_std", "base"]

    def test_tss_is_stable_around_the_base_reward(self, separable_records):
        splits = make_cv_splits(separable_records, n_splits=1, seed=0)
        config = CDRConfig(episodes=8, learning_rate=1e-3)
        table = get_sweep_service().sweep_rewards(
            config,
            "TP",
            parse_range("5:15"),
            separable_records,
            splits,
            MLPConfig(T=40, F=10, hidden=[16]),
            seed=1,
        )
        tss = [row.tss.mean for row in table.rows]
        assert max(tss) - min(tss) < 0.15

    def test_range_must_include_base(self, small_records, small_splits):
        with pytest.raises(ConfigError, match="base"):
            get_sweep_service().sweep_rewards(
                QUICK_CDR, "TP", [11.0, 12.0], small_records, small_splits, MLP
            )

    def test_sign_rules(self, small_records, small_splits):
        with pytest.raises(ConfigError, match="sign"):
            get_sweep_service().sweep_rewards(
                QUICK_CDR, "FP", [-20.0, 1.0], small_records, small_splits, MLP
            )

    def test_fold_count(self, small_records, small_splits):
        with pytest.raises(ConfigError):
            get_sweep_service().sweep_rewards(
                QUICK_CDR, "TN", [4.0], small_records, small_splits, MLP, n_folds=4
            )


@pytest.fixture
def fitted(small_records, small_splits):
    stats = fit_standardizer(subset(small_records, small_splits[0].train))
    return MLPClassifier(MLP, seed=0), stats


class TestComparison:
    def test_original_and_filtered_blocks(self, small_records, fitted, rng):
        external = pd.DataFrame(
            {
                "ar_id": [r.ar_id for r in small_records],
                "probability": rng.uniform(size=len(small_records)),
                "label": [r.label for r in small_records],
            }
        )
        original, filtered = get_evaluation_service().compare_external(
            [fitted, fitted], small_records, external
        )
        single = [r for r in small_records if not r.multi_ar]
        assert (original.name, original.n) == ("original", len(small_records))
        assert (filtered.name, filtered.n) == ("filtered", len(single))
        assert filtered.n_positive == sum(r.label for r in single)
        assert len(original.model_scan.points) == 101

    def test_label_disagreement(self, small_records, fitted):
        external = pd.DataFrame(
            {
                "ar_id": [r.ar_id for r in small_records],
                "probability": 0.5,
                "label": [1 - r.label for r in small_records],
            }
        )
        with pytest.raises(DataError):
            get_evaluation_service().compare_external([fitted], small_records, external)

    def test_external_file_validation(self, tmp_path):
        path = tmp_path / "ext.csv"
        pd.DataFrame({"ar_id": [1, 2], "probability": [0.2, 1.4], "label": [0, 1]}).to_csv(
            path, index=False
        )
        with pytest.raises(IngestionError) as exc:
            load_external_probabilities(path)
        assert exc.value.ar_id == 2

    def test_non_numeric_cells_are_ingestion_errors(self, tmp_path):
        path = tmp_path / "ext.csv"
        path.write_text("ar_id,probability,label\n1,0.3,0\n2,abc,1\n")
        with pytest.raises(IngestionError) as exc:
            load_external_probabilities(path)
        assert (exc.value.ar_id, exc.value.line) == (2, 3)

        path.write_text("ar_id,probability,label\n1,0.3,0\nx7,0.6,1\n")
        with pytest.raises(IngestionError) as exc:
            load_external_probabilities(path)
        assert exc.value.line == 3


class TestFoldTTest:
    def test_joins_on_fold(self):
        a = pd.DataFrame({"fold": [0, 1, 2, 3], "tss": [0.8, 0.82, 0.79, 0.85]})
        b = pd.DataFrame({"fold": [3, 2, 1, 0], "tss": [0.80, 0.75, 0.78, 0.70]})
        a["bss"] = [0.4, 0.5, 0.45, 0.5]
        b["bss"] = [0.3, 0.35, 0.4, 0.38]
        results = get_evaluation_service().ttest_fold_tables(a, b)
        assert set(results) == {"tss", "bss"}
        assert results["tss"].mean_difference == pytest.approx(
            np.mean([0.8 - 0.70, 0.82 - 0.78, 0.79 - 0.75, 0.85 - 0.80])
        )

    def test_mismatched_folds(self):
        a = pd.DataFrame({"fold": [0, 1], "tss": [0.8, 0.9], "bss": [0.1, 0.2]})
        b = pd.DataFrame({"fold": [0, 2], "tss": [0.7, 0.8], "bss": [0.1, 0.3]})
        with pytest.raises(DataError):
            get_evaluation_service().ttest_fold_tables(a, b)


class TestExplain:
    def test_efficiency_and_tables(self, small_records, small_splits, fitted):
        model, stats = fitted
        service = get_explain_service()
        targets = subset(small_records, small_splits[0].test[:3])
        train = subset(small_records, small_splits[0].train)
        result = service.explain(model, stats, targets, train, ShapConfig(players=[0, 1, 2, 3]))

        summary = service.summary_frame(result.attributions)
        np.testing.assert_allclose(summary["phi0"] + summary["sum_phi"], summary["f_x"], atol=1e-12)
        assert len(result.beeswarm) == 3 * 4
        assert set(result.waterfalls) == {r.ar_id for r in targets}
        assert 0.0 < result.expected_value < 1.0

        ranking = service.global_frame(result.global_importance)
        assert ranking["phi_global"].is_monotonic_decreasing

    def test_mean_background_is_zero_after_standardization(self, small_records, small_splits):
        train = subset(small_records, small_splits[0].train)
        stats = fit_standardizer(train)
        background = get_explain_service().background(ShapConfig(), stats, train)
        np.testing.assert_allclose(background, 0.0, atol=1e-9)
