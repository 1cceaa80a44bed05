"""
Cross-Validation Split Tool

AR-level train/validation/test splits: AR ids are shuffled within each
class and partitioned by ratio, so no AR (and no sample of an AR) appears in
two sets. Validation and test keep only single-AR patches; the training set
is not screened.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.models.dataset import ARRecord, ClassLabel, CVSplit
from src.utils.errors import SplitError

logger = logging.getLogger(__name__)

MIN_PER_CLASS = 3


def _partition_sizes(n: int, ratios: Sequence[float]) -> tuple:
    n_train = int(round(ratios[0] * n))
    n_val = int(round(ratios[1] * n))
    # every set gets at least one AR of the class
    n_train = min(max(n_train, 1), n - 2)
    n_val = min(max(n_val, 1), n - n_train - 1)
    return n_train, n_val, n - n_train - n_val


def make_cv_splits(
    records: Sequence[ARRecord],
    n_splits: int = 10,
    ratios: Optional[Sequence[float]] = None,
    seed: int = 0,
) -> List[CVSplit]:
    """
    Build ``n_splits`` independent AR-level splits.

    Split ``i`` draws its shuffles from ``SeedSequence([seed, i])``, so the
    result depends only on (records, ratios, seed).

    Raises:
        SplitError: ratios do not sum to 1, or a class has fewer than 3 ARs.
    """
    ratios = list(ratios) if ratios is not None else [0.55, 0.22, 0.23]
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    if n_splits < 1:
        raise SplitError("n_splits must be at least 1")

    by_class: Dict[ClassLabel, List[int]] = {label: [] for label in ClassLabel}
    multi = set()
    seen = set()
    for record in records:
        if record.ar_id in seen:
            raise SplitError(f"duplicate ar_id {record.ar_id}")
        seen.add(record.ar_id)
        by_class[record.class_label].append(record.ar_id)
        if record.multi_ar:
            multi.add(record.ar_id)

    for label, ids in by_class.items():
        if len(ids) < MIN_PER_CLASS:
            raise SplitError(
                f"class {label.value} has {len(ids)} ARs; at least {MIN_PER_CLASS} are needed"
            )

    splits = []
    for index in range(n_splits):
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        train: List[int] = []
        val: List[int] = []
        test: List[int] = []
        for label in ClassLabel:
            ids = np.array(sorted(by_class[label]))
            shuffled = rng.permutation(ids).tolist()
            n_train, n_val, _ = _partition_sizes(len(ids), ratios)
            train.extend(shuffled[:n_train])
            val.extend(i for i in shuffled[n_train : n_train + n_val] if i not in multi)
            test.extend(i for i in shuffled[n_train + n_val :] if i not in multi)
        splits.append(CVSplit(index=index, seed=seed, train=train, val=val, test=test))
        logger.info(
            "Split %d: %d train / %d val / %d test ARs", index, len(train), len(val), len(test)
        )
    return splits


def class_tally(records: Sequence[ARRecord], ids: Sequence[int]) -> Dict[str, int]:
    """Per-class AR counts of a subset (the NoFlare/C/M/X layout)."""
    wanted = set(ids)
    tally = {label.value: 0 for label in ClassLabel}
    for record in records:
        if record.ar_id in wanted:
            tally[record.class_label.value] += 1
    return tally


def subset(records: Sequence[ARRecord], ids: Sequence[int]) -> List[ARRecord]:
    """Records whose ids are in ``ids``, in ``ids`` order."""
    index = {r.ar_id: r for r in records}
    missing = [i for i in ids if i not in index]
    if missing:
        raise SplitError(f"split references unknown AR ids {missing[:5]}")
    return [index[i] for i in ids]
