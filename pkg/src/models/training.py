"""
Training Models

Trainer configurations, class weights, checkpoints and training logs for the
weighted cross-entropy trainer and the class-dependent-reward (CDR) trainer.
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from src.models.dataset import StandardizationStats
from src.models.metrics import MetricReport, MetricSummary

Monitor = Literal["TSS", "BSS"]
RewardName = Literal["TP", "TN", "FP", "FN"]

# Reward columns of the three CDR models (TP, TN, FP, FN)
REWARD_PRESETS: Dict[str, Dict[str, float]] = {
    "cnn": {"TP": 4.0, "TN": 10.0, "FP": -42.0, "FN": -15.0},
    "cnn_bilstm": {"TP": 7.0, "TN": 4.0, "FP": -24.0, "FN": -8.0},
    "transformer": {"TP": 10.0, "TN": 4.0, "FP": -20.0, "FN": -15.0},
}


class DLTrainConfig(BaseModel):
    """Weighted cross-entropy trainer with checkpoint-on-best-validation."""

    batch_size: int = Field(10, ge=1)
    epochs: int = Field(30, ge=1)
    optimizer: Literal["sgd", "adam"] = "adam"
    learning_rate: float = Field(1e-3, gt=0)
    monitor: Monitor = "TSS"
    seed: int = 0

    @classmethod
    def full_scale(cls) -> "DLTrainConfig":
        return cls(batch_size=10, epochs=150, optimizer="adam", learning_rate=1e-4)


class Rewards(BaseModel):
    TP: float = 10.0
    TN: float = 4.0
    FP: float = -20.0
    FN: float = -15.0

    @model_validator(mode="after")
    def _signs(self):
        if self.TP <= 0 or self.TN <= 0:
            raise ValueError("TP and TN rewards must be positive")
        if self.FP >= 0 or self.FN >= 0:
            raise ValueError("FP and FN rewards must be negative")
        return self


class CDRConfig(BaseModel):
    """Class-dependent-reward trainer driven by experience replay."""

    rewards: Rewards = Field(default_factory=Rewards)
    batch_size: int = Field(49, ge=1)
    episodes: int = Field(8, ge=1)
    learning_rate: float = Field(1.5e-4, gt=0)
    epsilon_start: float = Field(1.0, ge=0, le=1)
    epsilon_decay: float = Field(0.99, ge=0, le=1)
    epsilon_floor: float = Field(0.01, ge=0, le=1)
    replay_capacity: int = Field(1000, ge=1)
    monitor: Monitor = "TSS"
    seed: int = 0

    @model_validator(mode="after")
    def _capacity(self):
        if self.replay_capacity <= self.batch_size:
            raise ValueError(
                f"replay capacity {self.replay_capacity} must exceed "
                f"batch size {self.batch_size}"
            )
        return self

    @classmethod
    def full_scale(cls) -> "CDRConfig":
        return cls(
            rewards=Rewards(**REWARD_PRESETS["transformer"]),
            batch_size=49,
            episodes=8,
            learning_rate=1.5e-4,
            epsilon_decay=0.99,
            replay_capacity=1000,
        )


class ClassWeights(BaseModel):
    """ω_k = N_total / (K · N_k), indexed by class (0 = negative, 1 = positive)."""

    weights: List[float]
    counts: List[int]


class TrainLogRow(BaseModel):
    step: int = Field(..., description="Epoch or episode index, 1-based")
    train_loss: float
    val_tss: Optional[float] = None
    val_bss: Optional[float] = None
    epsilon: Optional[float] = None
    optimizer_steps: int = 0


class TrainLog(BaseModel):
    trainer: Literal["dl", "cdr"]
    rows: List[TrainLogRow] = Field(default_factory=list)


class Checkpoint(BaseModel):
    """Best parameters seen on the validation set (flat arrays by name)."""

    monitor: Monitor
    score: float
    step: int = Field(..., description="Epoch/episode that produced the parameters")
    parameters: Dict[str, List[float]]
    shapes: Dict[str, List[int]]
    bn_stats: Dict[str, List[List[float]]] = Field(
        default_factory=dict, description="name -> [running_mean, running_var]"
    )


class TrainResult(BaseModel):
    checkpoint: Checkpoint
    log: TrainLog


class FoldOutcome(BaseModel):
    """One fold trained and scored on its test set."""

    fold: int
    seed: int
    result: TrainResult
    test_report: MetricReport
    stats: StandardizationStats


class SweepRow(BaseModel):
    value: float
    tss: MetricSummary
    bss: MetricSummary
    base: bool = False


class SweepTable(BaseModel):
    """Reward-sensitivity table: one perturbed reward, all other rewards fixed."""

    which: RewardName
    base_rewards: Rewards
    n_folds: int
    rows: List[SweepRow]
