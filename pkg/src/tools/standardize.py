"""
Standardization Tool

Per-feature z-scores fitted on the training rows only and then applied to
every split.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.models.dataset import ARRecord, CVSplit, LabeledInstance, StandardizationStats
from src.tools.splits import subset
from src.utils.errors import ContractError, DataError

MIN_STD = 1e-12


def fit_standardizer(records: Sequence[ARRecord]) -> StandardizationStats:
    """Mean and (population) standard deviation over all training rows."""
    if not records:
        raise ContractError("cannot fit standardization on an empty training set")
    names = records[0].feature_names
    for record in records:
        if record.feature_names != names:
            raise DataError(f"AR {record.ar_id}: feature columns differ from the training set")
    rows = np.concatenate([r.series for r in records], axis=0)
    return StandardizationStats(
        feature_names=list(names),
        mean=rows.mean(axis=0).tolist(),
        std=rows.std(axis=0).tolist(),
        n_rows=rows.shape[0],
    )


def apply_standardizer(stats: StandardizationStats, record: ARRecord) -> LabeledInstance:
    """z-score one AR; features whose training std is below 1e-12 map to 0."""
    if record.feature_names != stats.feature_names:
        raise DataError(f"AR {record.ar_id}: feature columns differ from the fitted statistics")
    mean = np.asarray(stats.mean)
    std = np.asarray(stats.std)
    live = std >= MIN_STD
    x = np.zeros_like(record.series)
    x[:, live] = (record.series[:, live] - mean[live]) / std[live]
    return LabeledInstance(ar_id=record.ar_id, x=x, y=record.label)


def to_arrays(
    stats: StandardizationStats, records: Sequence[ARRecord]
) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """Standardized [N×T×F] inputs, binary labels and AR ids."""
    instances = [apply_standardizer(stats, r) for r in records]
    if not instances:
        raise ContractError("no records to standardize")
    x = np.stack([i.x for i in instances])
    y = np.array([i.y for i in instances], dtype=np.int64)
    return x, y, [i.ar_id for i in instances]


@dataclass
class SplitData:
    """Standardized arrays of one CV split, fitted on its training ARs."""

    stats: StandardizationStats
    x_train: np.ndarray
    y_train: np.ndarray
    train_ids: List[int]
    x_val: np.ndarray
    y_val: np.ndarray
    val_ids: List[int]
    x_test: np.ndarray
    y_test: np.ndarray
    test_ids: List[int]

    @property
    def feature_names(self) -> List[str]:
        return list(self.stats.feature_names)


def prepare_split(records: Sequence[ARRecord], split: CVSplit) -> SplitData:
    train = subset(records, split.train)
    stats = fit_standardizer(train)
    x_train, y_train, train_ids = to_arrays(stats, train)
    x_val, y_val, val_ids = to_arrays(stats, subset(records, split.val))
    x_test, y_test, test_ids = to_arrays(stats, subset(records, split.test))
    return SplitData(
        stats=stats,
        x_train=x_train,
        y_train=y_train,
        train_ids=train_ids,
        x_val=x_val,
        y_val=y_val,
        val_ids=val_ids,
        x_test=x_test,
        y_test=y_test,
        test_ids=test_ids,
    )
