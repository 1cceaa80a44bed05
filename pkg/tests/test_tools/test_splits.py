"""
Tests for AR-level splits, standardization and the synthetic generator.
"""

import numpy as np
import pytest

from src.models.dataset import ClassLabel, SyntheticConfig
from src.tools.metrics import evaluate
from src.tools.splits import class_tally, make_cv_splits, subset
from src.tools.standardize import apply_standardizer, fit_standardizer, prepare_split
from src.tools.synthetic import generate_synthetic
from src.utils.errors import ContractError, DataError, SplitError


class TestMakeCvSplits:
    def test_sets_are_disjoint_and_cover_single_ar_patches(self, small_records, small_splits):
        multi = {r.ar_id for r in small_records if r.multi_ar}
        for split in small_splits:
            train, val, test = set(split.train), set(split.val), set(split.test)
            assert not train & val and not train & test and not val & test
            assert not (val | test) & multi
            single = {r.ar_id for r in small_records if not r.multi_ar}
            assert single <= train | val | test

    def test_every_class_reaches_training(self, small_records, small_splits):
        for split in small_splits:
            tally = class_tally(small_records, split.train)
            assert all(count > 0 for count in tally.values())

    def test_ratios_per_class(self, small_records):
        (split,) = make_cv_splits(small_records, n_splits=1, seed=0)
        tally = class_tally(small_records, split.train)
        # 55 % of 24 C, 12 M and 6 X ARs
        assert (tally["C"], tally["M"], tally["X"]) == (13, 7, 3)

    def test_same_seed_same_splits(self, small_records):
        assert make_cv_splits(small_records, 2, seed=4) == make_cv_splits(small_records, 2, seed=4)

    def test_splits_differ_from_each_other(self, small_records):
        first, second = make_cv_splits(small_records, 2, seed=4)
        assert first.train != second.train

    def test_too_few_ars_in_a_class(self, small_records):
        x_class = [r for r in small_records if r.class_label == ClassLabel.X][:2]
        others = [r for r in small_records if r.class_label != ClassLabel.X]
        with pytest.raises(SplitError, match="X"):
            make_cv_splits(others + x_class)

    def test_bad_ratios(self, small_records):
        with pytest.raises(SplitError):
            make_cv_splits(small_records, ratios=[0.5, 0.5, 0.5])

    def test_duplicate_ids(self, small_records):
        with pytest.raises(SplitError, match="duplicate"):
            make_cv_splits(small_records + small_records[:1])

    def test_hygiene_over_randomized_trials(self, small_records):
        trial_rng = np.random.default_rng(2024)
        for trial in range(300):
            flags = trial_rng.random(len(small_records)) < trial_rng.uniform(0.0, 0.5)
            records = [
                r.model_copy(update={"multi_ar": bool(flag)})
                for r, flag in zip(small_records, flags)
            ]
            multi = {r.ar_id for r in records if r.multi_ar}
            single = {r.ar_id for r in records if not r.multi_ar}
            train_ratio = trial_rng.uniform(0.4, 0.7)
            val_ratio = (1.0 - train_ratio) * trial_rng.uniform(0.2, 0.8)
            ratios = [train_ratio, val_ratio, 1.0 - train_ratio - val_ratio]

            (split,) = make_cv_splits(records, n_splits=1, ratios=ratios, seed=trial)
            train, val, test = set(split.train), set(split.val), set(split.test)
            assert len(train) + len(val) + len(test) == len(train | val | test), trial
            assert not (val | test) & multi, trial
            assert single <= train | val | test, trial
            assert (train | val | test) <= multi | single, trial

    def test_subset_rejects_unknown_ids(self, small_records):
        with pytest.raises(SplitError):
            subset(small_records, [1])


class TestStandardization:
    def test_training_rows_have_zero_mean_unit_std(self, small_records, small_splits):
        data = prepare_split(small_records, small_splits[0])
        rows = data.x_train.reshape(-1, data.x_train.shape[-1])
        np.testing.assert_allclose(rows.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(rows.std(axis=0), 1.0, atol=1e-9)

    def test_statistics_come_from_training_ars_only(self, small_records, small_splits):
        split = small_splits[0]
        data = prepare_split(small_records, split)
        train_rows = np.concatenate([r.series for r in subset(small_records, split.train)])
        np.testing.assert_allclose(data.stats.mean, train_rows.mean(axis=0))
        assert data.stats.n_rows == 40 * len(split.train)

    def test_constant_feature_maps_to_zero(self, small_records):
        record = small_records[0]
        constant = record.model_copy(update={"series": np.ones_like(record.series)})
        stats = fit_standardizer([constant, constant])
        assert np.all(apply_standardizer(stats, constant).x == 0.0)

    def test_empty_training_set(self):
        with pytest.raises(ContractError):
            fit_standardizer([])

    def test_feature_mismatch(self, small_records):
        stats = fit_standardizer(small_records[:3])
        (other,) = [
            r.model_copy(update={"feature_names": list(reversed(r.feature_names))})
            for r in small_records[:1]
        ]
        with pytest.raises(DataError):
            apply_standardizer(stats, other)


class TestSynthetic:
    def test_counts_and_ids(self):
        records = generate_synthetic(SyntheticConfig(counts=[5, 4, 3, 2]), seed=1)
        assert len(records) == 14
        assert len({r.ar_id for r in records}) == 14
        assert [r.class_label for r in records].count(ClassLabel.X) == 2

    def test_same_seed_same_data(self):
        config = SyntheticConfig(counts=[3, 3, 3, 3])
        a = generate_synthetic(config, seed=2)
        b = generate_synthetic(config, seed=2)
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.series, rb.series)
            assert ra.multi_ar == rb.multi_ar

    def test_high_separation_is_separable_by_a_mean_threshold(self, separable_records):
        (split,) = make_cv_splits(separable_records, n_splits=1, seed=0)
        data = prepare_split(separable_records, split)

        def score(x):
            return x.mean(axis=(1, 2))

        train_scores = score(data.x_train)
        cut = 0.5 * (
            train_scores[data.y_train == 0].mean() + train_scores[data.y_train == 1].mean()
        )
        test_scores = score(data.x_test)
        probs = (test_scores >= cut).astype(float)
        assert evaluate(probs, data.y_test).tss > 0.9
