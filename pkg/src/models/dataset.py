"""
Dataset Models

Active-region records, cross-validation splits and standardization
statistics. An AR is the unit of both prediction and splitting.
"""

from enum import Enum
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SERIES_LENGTH = 40

LOS_FEATURES = ["R_VALUE", "AREA_ACR"]
VECTOR_FEATURES = [
    "TOTUSJZ",
    "TOTUSJH",
    "TOTPOT",
    "ABSNJZH",
    "SAVNCPP",
    "USFLUX",
    "MEANPOT",
    "SHRGT45",
]
DEFAULT_FEATURES = LOS_FEATURES + VECTOR_FEATURES


class ClassLabel(str, Enum):
    """GOES class of the largest flare within the forecast window."""

    NOFLARE = "NOFLARE"
    C = "C"
    M = "M"
    X = "X"


def binarize(label: ClassLabel) -> int:
    """1 for ≥M-class (M, X), 0 otherwise."""
    return 1 if ClassLabel(label) in (ClassLabel.M, ClassLabel.X) else 0


class ARRecord(BaseModel):
    """
    One active region: 40 time-ordered rows of F feature values.

    Example:
        {"ar_id": 12257, "class_label": "M", "multi_ar": False,
         "feature_names": ["R_VALUE", ...], "series": <40×F array>}
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ar_id: int = Field(..., gt=0, description="Active region number")
    class_label: ClassLabel = Field(..., description="Largest flare class")
    multi_ar: bool = Field(False, description="Patch contains more than one AR")
    feature_names: List[str] = Field(..., min_length=1, description="Column names, in order")
    series: np.ndarray = Field(..., description="T×F matrix, rows ordered by time")

    @field_validator("series", mode="before")
    @classmethod
    def _as_float_matrix(cls, value):
        return np.array(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_shape(self):
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError(f"AR {self.ar_id}: duplicate feature names")
        expected = (SERIES_LENGTH, len(self.feature_names))
        if self.series.shape != expected:
            raise ValueError(
                f"AR {self.ar_id}: series shape {self.series.shape}, expected {expected}"
            )
        if not np.isfinite(self.series).all():
            raise ValueError(f"AR {self.ar_id}: non-finite feature values")
        self.series.flags.writeable = False
        return self

    @property
    def label(self) -> int:
        return binarize(self.class_label)


class CVSplit(BaseModel):
    """Disjoint AR-id sets of one cross-validation dataset."""

    index: int = Field(..., ge=0)
    seed: int
    train: List[int]
    val: List[int]
    test: List[int]

    @model_validator(mode="after")
    def _disjoint(self):
        train, val, test = set(self.train), set(self.val), set(self.test)
        if train & val or train & test or val & test:
            raise ValueError(f"split {self.index}: AR ids overlap between sets")
        return self


class SplitConfig(BaseModel):
    n_splits: int = Field(10, ge=1)
    ratios: List[float] = Field(default_factory=lambda: [0.55, 0.22, 0.23])
    seed: int = 0

    @field_validator("ratios")
    @classmethod
    def _sum_to_one(cls, value):
        if len(value) != 3 or any(r < 0 for r in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ValueError("ratios must be three non-negative numbers summing to 1")
        return value


class StandardizationStats(BaseModel):
    """Per-feature z-score parameters fitted on training rows only."""

    feature_names: List[str]
    mean: List[float]
    std: List[float]
    n_rows: int = Field(..., ge=1, description="Number of training rows in the fit")

    @model_validator(mode="after")
    def _lengths(self):
        if not len(self.mean) == len(self.std) == len(self.feature_names):
            raise ValueError("mean/std length must equal the number of features")
        if any(s < 0 for s in self.std):
            raise ValueError("standard deviations must be non-negative")
        return self


class LabeledInstance(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ar_id: int
    x: np.ndarray = Field(..., description="Standardized T×F matrix")
    y: int = Field(..., ge=0, le=1)


class SyntheticConfig(BaseModel):
    """Knobs of the synthetic AR generator that stands in for the SHARP archive."""

    counts: List[int] = Field(
        default_factory=lambda: [223, 168, 46, 8],
        description="ARs per class in NOFLARE/C/M/X order",
    )
    feature_names: List[str] = Field(default_factory=lambda: list(DEFAULT_FEATURES))
    noise: float = Field(1.0, gt=0)
    separation: float = Field(2.0, ge=0)
    trend: float = Field(1.0, ge=0, description="Rise over the 40 steps per unit separation")
    multi_ar_fraction: float = Field(0.2, ge=0, le=1)

    @field_validator("counts")
    @classmethod
    def _positive(cls, value):
        if len(value) != 4 or any(c <= 0 for c in value):
            raise ValueError("counts must be four positive integers (NOFLARE, C, M, X)")
        return value
