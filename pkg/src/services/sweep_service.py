"""
Sweep Service
Reward-sensitivity sweeps: perturb one of TP/TN/FP/FN in unit steps, retrain
the CDR model on each fold and tabulate TSS and BSS mean ± std per value
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.models.dataset import ARRecord, CVSplit
from src.models.metrics import MetricSummary
from src.models.training import CDRConfig, FoldOutcome, RewardName, Rewards, SweepRow, SweepTable
from src.networks.checkpoint import NetworkConfig
from src.services.training_service import train_fold
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)


def parse_range(text: str) -> List[float]:
    """``"5:15"`` → 5, 6, ..., 15; ``"-25:-15:2"`` uses step 2. Bounds inclusive."""
    parts = text.split(":")
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"range must look like start:stop[:step], got '{text}'") from None
    if len(numbers) not in (2, 3):
        raise ConfigError(f"range must look like start:stop[:step], got '{text}'")
    start, stop = numbers[0], numbers[1]
    step = numbers[2] if len(numbers) == 3 else 1.0
    if step <= 0 or stop < start:
        raise ConfigError(f"range '{text}' is empty")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _summary(values: Sequence[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return MetricSummary(mean=float(arr.mean()), std=std, n=int(arr.size))


def _run_cell(args: Tuple) -> FoldOutcome:
    records, split, network, config, seed, threshold = args
    return train_fold(records, split, network, "cdr", config, seed, threshold)


class SweepService:
    """Service for reward-sensitivity experiments"""

    def sweep_rewards(
        self,
        base: CDRConfig,
        which: RewardName,
        values: Sequence[float],
        records: Sequence[ARRecord],
        splits: Sequence[CVSplit],
        network: NetworkConfig,
        n_folds: int = 1,
        seed: int = 0,
        jobs: int = 1,
        threshold: float = 0.5,
    ) -> SweepTable:
        """
        Retrain over the first ``n_folds`` splits for every value of the
        perturbed reward. A fold's seed depends only on (seed, fold), so every
        row sees the same initializations and the base row equals a plain
        train + eval run.

        Raises:
            ConfigError: the range misses the base value or breaks a sign rule.
        """
        if which not in ("TP", "TN", "FP", "FN"):
            raise ConfigError(f"unknown reward '{which}'")
        base_value = getattr(base.rewards, which)
        if base_value not in values:
            raise ConfigError(f"range must include the base {which} reward {base_value:g}")
        if not 1 <= n_folds <= len(splits):
            raise ConfigError(f"n_folds must lie in 1..{len(splits)}, got {n_folds}")

        configs = []
        for value in values:
            try:
                rewards = Rewards(**{**base.rewards.model_dump(), which: value})
            except ValidationError:
                raise ConfigError(
                    f"{which} reward {value:g} violates the reward sign rules"
                ) from None
            configs.append(base.model_copy(update={"rewards": rewards}))

        tasks = [
            (records, split, network, config, seed, threshold)
            for config in configs
            for split in splits[:n_folds]
        ]
        logger.info("Sweeping %s over %d values x %d folds", which, len(values), n_folds)
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outcomes = list(pool.map(_run_cell, tasks))
        else:
            outcomes = [_run_cell(task) for task in tasks]

        rows = []
        for i, value in enumerate(values):
            cell = outcomes[i * n_folds : (i + 1) * n_folds]
            rows.append(
                SweepRow(
                    value=value,
                    tss=_summary([o.test_report.tss for o in cell]),
                    bss=_summary([o.test_report.bss for o in cell]),
                    base=value == base_value,
                )
            )
            logger.info("%s=%g: TSS %.3f", which, value, rows[-1].tss.mean)
        return SweepTable(which=which, base_rewards=base.rewards, n_folds=n_folds, rows=rows)

    def to_frame(self, table: SweepTable) -> pd.DataFrame:
        """``<which>,tss_mean,tss_std,bss_mean,bss_std,base`` rows."""
        return pd.DataFrame(
            [
                {
                    table.which: row.value,
                    "tss_mean": row.tss.mean,
                    "tss_std": row.tss.std,
                    "bss_mean": row.bss.mean,
                    "bss_std": row.bss.std,
                    "base": int(row.base),
                }
                for row in table.rows
            ]
        )


# Global service instance
_sweep_service = None


def get_sweep_service() -> SweepService:
    """Get or create sweep service instance"""
    global _sweep_service
    if _sweep_service is None:
        _sweep_service = SweepService()
    return _sweep_service
