"""
Forecast Verification Tool

Confusion counts, Recall / FPR / TSS, Brier score and Brier skill score,
101-point threshold scans and mean ± std aggregation across folds.

The categorical rule everywhere is ``p >= threshold`` → positive.
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.models.metrics import (
    BestThreshold,
    ConfusionMatrix,
    FoldAggregate,
    MetricReport,
    MetricSummary,
    ScanPoint,
    ThresholdScan,
)
from src.utils.errors import ContractError, ShapeError, UndefinedMetricError

AGGREGATED_METRICS = ["recall", "fpr", "tss", "bs", "bss"]


def _binary(values: Sequence, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"{name} must be a non-empty 1-D sequence")
    if not np.isin(arr, (0, 1)).all():
        raise ContractError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def _probabilities(values: Sequence) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError("probabilities must be a non-empty 1-D sequence")
    if not np.isfinite(arr).all() or (arr < 0).any() or (arr > 1).any():
        raise ContractError("probabilities must lie in [0, 1]")
    return arr


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    pred = _binary(predictions, "predictions")
    true = _binary(labels, "labels")
    if pred.shape != true.shape:
        raise ShapeError(f"{pred.size} predictions vs {true.size} labels")
    return ConfusionMatrix(
        TP=int(np.sum((pred == 1) & (true == 1))),
        TN=int(np.sum((pred == 0) & (true == 0))),
        FP=int(np.sum((pred == 1) & (true == 0))),
        FN=int(np.sum((pred == 0) & (true == 1))),
    )


def tss(cm: ConfusionMatrix) -> Tuple[float, float, float]:
    """
    (recall, fpr, tss) of a confusion matrix.

    Raises:
        UndefinedMetricError: no positive or no negative examples.
    """
    if cm.TP + cm.FN == 0:
        raise UndefinedMetricError("recall is undefined without positive examples")
    if cm.FP + cm.TN == 0:
        raise UndefinedMetricError("false-positive rate is undefined without negative examples")
    recall = cm.TP / (cm.TP + cm.FN)
    fpr = cm.FP / (cm.FP + cm.TN)
    return recall, fpr, recall - fpr


def brier_skill(probs: Sequence[float], labels: Sequence[int]) -> Tuple[float, float]:
    """
    (bs, bss) against the climatology forecast (the label mean).

    Raises:
        UndefinedMetricError: all labels identical (zero climatology variance).
    """
    p = _probabilities(probs)
    y = _binary(labels, "labels").astype(np.float64)
    if p.shape != y.shape:
        raise ShapeError(f"{p.size} probabilities vs {y.size} labels")
    reference = float(np.mean((y - y.mean()) ** 2))
    if reference == 0.0:
        raise UndefinedMetricError("BSS is undefined when every label is the same")
    bs = float(np.mean((y - p) ** 2))
    return bs, 1.0 - bs / reference


def evaluate(probs: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> MetricReport:
    if not 0.0 <= threshold <= 1.0:
        raise ContractError(f"threshold must lie in [0, 1], got {threshold}")
    p = _probabilities(probs)
    y = _binary(labels, "labels")
    cm = confusion((p >= threshold).astype(np.int64), y)
    recall, fpr, score = tss(cm)
    bs, bss = brier_skill(p, y)
    return MetricReport(
        recall=recall,
        fpr=fpr,
        tss=score,
        bs=bs,
        bss=bss,
        counts=cm,
        n=cm.n,
        climatology=float(y.mean()),
        threshold=threshold,
    )


def threshold_scan(probs: Sequence[float], labels: Sequence[int]) -> ThresholdScan:
    """TSS at every threshold 0%, 1%, ..., 100%."""
    p = _probabilities(probs)
    y = _binary(labels, "labels")
    if p.shape != y.shape:
        raise ShapeError(f"{p.size} probabilities vs {y.size} labels")
    if y.min() == y.max():
        raise UndefinedMetricError("threshold scan needs both classes")
    points = []
    for pct in range(101):
        recall, fpr, score = tss(confusion((p >= pct / 100).astype(np.int64), y))
        points.append(ScanPoint(threshold_pct=pct, tss=score, recall=recall, fpr=fpr))
    return ThresholdScan(points=points)


def best_threshold(scan: ThresholdScan) -> BestThreshold:
    """Point of maximum TSS; the lowest threshold wins ties."""
    best = scan.points[0]
    for point in scan.points[1:]:
        if point.tss > best.tss:
            best = point
    return BestThreshold(**best.model_dump())


def mean_scan(scans: Sequence[ThresholdScan]) -> ThresholdScan:
    """Average several scans point by point (fold-averaged curve)."""
    if not scans:
        raise ContractError("no scans to average")
    grid = [p.threshold_pct for p in scans[0].points]
    for scan in scans[1:]:
        if [p.threshold_pct for p in scan.points] != grid:
            raise ShapeError("scans use different thresholds")
    points = []
    for i, pct in enumerate(grid):
        column = [scan.points[i] for scan in scans]
        points.append(
            ScanPoint(
                threshold_pct=pct,
                tss=float(np.mean([c.tss for c in column])),
                recall=float(np.mean([c.recall for c in column])),
                fpr=float(np.mean([c.fpr for c in column])),
            )
        )
    return ThresholdScan(points=points)


def summarize(values: Sequence[float]) -> MetricSummary:
    """Sample mean and standard deviation (n - 1 denominator)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise ContractError(f"need at least 2 values to aggregate, got {arr.size}")
    return MetricSummary(mean=float(arr.mean()), std=float(arr.std(ddof=1)), n=int(arr.size))


def aggregate_folds(reports: Sequence[MetricReport]) -> FoldAggregate:
    if len(reports) < 2:
        raise ContractError(f"need at least 2 fold reports, got {len(reports)}")
    return FoldAggregate(
        metrics={
            name: summarize([getattr(r, name) for r in reports]) for name in AGGREGATED_METRICS
        }
    )


# Tabular output -----------------------------------------------------------


def scan_to_frame(scan: ThresholdScan) -> pd.DataFrame:
    return pd.DataFrame(
        {"threshold_pct": [p.threshold_pct for p in scan.points], "tss": scan.tss_values()}
    )


def report_row(report: MetricReport) -> Dict[str, float]:
    row: Dict[str, float] = {name: getattr(report, name) for name in AGGREGATED_METRICS}
    row.update(report.counts.model_dump())
    row["n"] = report.n
    row["climatology"] = report.climatology
    row["threshold"] = report.threshold
    return row


def reports_to_frame(reports: Sequence[MetricReport], fold_ids: List[int]) -> pd.DataFrame:
    """One row per fold: ``fold,recall,fpr,tss,bs,bss,TP,TN,FP,FN,...``."""
    rows = []
    for fold, report in zip(fold_ids, reports):
        rows.append({"fold": fold, **report_row(report)})
    return pd.DataFrame(rows)
