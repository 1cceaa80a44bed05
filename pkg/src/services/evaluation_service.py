"""
Evaluation Service
Test-set reports, threshold scans, fold aggregation and the comparison with
external (scoreboard) probabilities on original and filtered test sets
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.models.dataset import ARRecord, StandardizationStats
from src.models.metrics import ComparisonBlock, MetricReport, ThresholdScan, TTestResult
from src.networks.base import Classifier
from src.tools import metrics
from src.tools.artifact_store import load_table
from src.tools.standardize import to_arrays
from src.tools.stats import paired_ttest
from src.utils.errors import DataError, IngestionError

logger = logging.getLogger(__name__)

EXTERNAL_COLUMNS = ["ar_id", "probability", "label"]

FittedModel = Tuple[Classifier, StandardizationStats]


def load_external_probabilities(path: Union[str, Path]) -> pd.DataFrame:
    """Read ``ar_id,probability,label`` rows (one per AR)."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"probability file not found: {path}")
    df = pd.read_csv(path)
    missing = [c for c in EXTERNAL_COLUMNS if c not in df.columns]
    if missing:
        raise IngestionError(f"{path.name}: missing column(s) {', '.join(missing)}")
    df = df[EXTERNAL_COLUMNS].apply(pd.to_numeric, errors="coerce")
    if df["ar_id"].isna().any():
        idx = int(np.flatnonzero(df["ar_id"].isna().to_numpy())[0])
        raise IngestionError(f"{path.name}: non-numeric ar_id", line=idx + 2)
    if df["ar_id"].duplicated().any():
        dup = int(df.loc[df["ar_id"].duplicated(), "ar_id"].iloc[0])
        raise IngestionError(f"{path.name}: duplicate AR", ar_id=dup)
    # NaN from a non-numeric cell fails both range checks
    bad = ~df["probability"].between(0.0, 1.0) | ~df["label"].isin([0, 1])
    if bad.any():
        idx = int(np.flatnonzero(bad.to_numpy())[0])
        raise IngestionError(
            f"{path.name}: probability must be a number in [0, 1] and label 0 or 1",
            ar_id=int(df["ar_id"].iloc[idx]),
            line=idx + 2,
        )
    return df.astype({"ar_id": int, "probability": float, "label": int})


class EvaluationService:
    """Service for scoring trained models"""

    def evaluate_model(
        self,
        model: Classifier,
        stats: StandardizationStats,
        records: Sequence[ARRecord],
        threshold: float = 0.5,
    ) -> MetricReport:
        x, y, _ = to_arrays(stats, records)
        return metrics.evaluate(model.predict_proba_batch(x), y, threshold)

    def scan_model(
        self, model: Classifier, stats: StandardizationStats, records: Sequence[ARRecord]
    ) -> ThresholdScan:
        x, y, _ = to_arrays(stats, records)
        return metrics.threshold_scan(model.predict_proba_batch(x), y)

    def fold_probabilities(
        self, models: Sequence[FittedModel], records: Sequence[ARRecord]
    ) -> List[np.ndarray]:
        return [model.predict_proba_batch(to_arrays(stats, records)[0]) for model, stats in models]

    def compare_external(
        self,
        models: Sequence[FittedModel],
        records: Sequence[ARRecord],
        external: pd.DataFrame,
    ) -> List[ComparisonBlock]:
        """
        Score fold models and external probabilities on the ARs listed in the
        external file: all of them ("original") and single-AR patches only
        ("filtered"). Model curves are averaged over folds.
        """
        by_id = {r.ar_id: r for r in records}
        unknown = [i for i in external["ar_id"] if i not in by_id]
        if unknown:
            logger.warning("%d external ARs are not in the dataset; ignored", len(unknown))
        external = external[external["ar_id"].isin(list(by_id))]

        blocks = []
        for name, keep_multi in (("original", True), ("filtered", False)):
            rows = external
            if not keep_multi:
                single = np.array([not by_id[i].multi_ar for i in external["ar_id"]], dtype=bool)
                rows = external.loc[single]
            subset = [by_id[i] for i in rows["ar_id"]]
            labels = rows["label"].to_numpy()
            if any(r.label != y for r, y in zip(subset, labels)):
                raise DataError("external labels disagree with the dataset class labels")
            scans = [
                metrics.threshold_scan(p, labels)
                for p in self.fold_probabilities(models, subset)
            ]
            model_scan = metrics.mean_scan(scans)
            external_scan = metrics.threshold_scan(rows["probability"].to_numpy(), labels)
            blocks.append(
                ComparisonBlock(
                    name=name,
                    n=len(subset),
                    n_positive=int(labels.sum()),
                    model_best=metrics.best_threshold(model_scan),
                    external_best=metrics.best_threshold(external_scan),
                    model_scan=model_scan,
                    external_scan=external_scan,
                )
            )
            logger.info("Compared %s test set: %d ARs", name, len(subset))
        return blocks

    def ttest_fold_tables(
        self, table_a: pd.DataFrame, table_b: pd.DataFrame, columns: Sequence[str] = ("tss", "bss")
    ) -> Dict[str, TTestResult]:
        """Paired t-tests on per-fold metric tables joined by fold id."""
        for table in (table_a, table_b):
            missing = [c for c in ("fold", *columns) if c not in table.columns]
            if missing:
                raise DataError(f"fold table lacks column(s) {', '.join(missing)}")
        joined = table_a.merge(table_b, on="fold", suffixes=("_a", "_b"))
        if len(joined) != len(table_a) or len(joined) != len(table_b):
            raise DataError("fold tables do not cover the same folds")
        return {
            c: paired_ttest(joined[f"{c}_a"], joined[f"{c}_b"], label=c.upper()) for c in columns
        }

    def ttest_files(
        self, path_a: Union[str, Path], path_b: Union[str, Path]
    ) -> Dict[str, TTestResult]:
        return self.ttest_fold_tables(load_table(path_a), load_table(path_b))


# Global service instance
_evaluation_service = None


def get_evaluation_service() -> EvaluationService:
    """Get or create evaluation service instance"""
    global _evaluation_service
    if _evaluation_service is None:
        _evaluation_service = EvaluationService()
    return _evaluation_service
