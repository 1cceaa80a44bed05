"""
Verification Models

Confusion counts, metric reports, threshold scans and paired t-test results.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class ConfusionMatrix(BaseModel):
    TP: int = Field(..., ge=0)
    TN: int = Field(..., ge=0)
    FP: int = Field(..., ge=0)
    FN: int = Field(..., ge=0)

    @property
    def n(self) -> int:
        return self.TP + self.TN + self.FP + self.FN


class MetricReport(BaseModel):
    """Categorical (Recall/FPR/TSS) and probabilistic (BS/BSS) skill of one evaluation."""

    recall: float = Field(..., ge=0, le=1)
    fpr: float = Field(..., ge=0, le=1)
    tss: float = Field(..., ge=-1, le=1)
    bs: float = Field(..., ge=0, le=1)
    bss: float
    counts: ConfusionMatrix
    n: int
    climatology: float = Field(..., description="Event base rate ȳ")
    threshold: float = 0.5

    @model_validator(mode="after")
    def _identity(self):
        if self.tss != self.recall - self.fpr:
            raise ValueError("tss must equal recall - fpr")
        if self.n != self.counts.n:
            raise ValueError("n must equal the confusion-matrix total")
        return self


class ScanPoint(BaseModel):
    threshold_pct: int = Field(..., ge=0, le=100)
    tss: float = Field(..., ge=-1, le=1)
    recall: float
    fpr: float


class ThresholdScan(BaseModel):
    points: List[ScanPoint]

    @model_validator(mode="after")
    def _increasing(self):
        pcts = [p.threshold_pct for p in self.points]
        if any(b <= a for a, b in zip(pcts, pcts[1:])):
            raise ValueError("scan thresholds must be strictly increasing")
        return self

    def tss_values(self) -> List[float]:
        return [p.tss for p in self.points]


class BestThreshold(BaseModel):
    threshold_pct: int
    tss: float
    recall: float
    fpr: float


class MetricSummary(BaseModel):
    """Mean and sample standard deviation of one metric across folds."""

    mean: float
    std: float
    n: int


class FoldAggregate(BaseModel):
    metrics: Dict[str, MetricSummary]

    def fmt(self, name: str, digits: int = 3) -> str:
        m = self.metrics[name]
        return f"{m.mean:.{digits}f}±{m.std:.{digits}f}"


class TTestResult(BaseModel):
    t: float
    p_value: float = Field(..., ge=0, le=1)
    df: int
    mean_difference: float
    label: Optional[str] = None


class ComparisonBlock(BaseModel):
    """Model vs external forecasts on one test population (original or filtered)."""

    name: str
    n: int
    n_positive: int
    model_best: BestThreshold
    external_best: BestThreshold
    model_scan: ThresholdScan
    external_scan: ThresholdScan
