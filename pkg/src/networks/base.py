"""
Shared classifier surface: forward pass in a named mode, positive-class
probabilities and thresholded predictions.
"""

from __future__ import annotations

from typing import Literal, Union

import numpy as np

from src.engine import ops
from src.engine.layers import Module
from src.engine.tensor import Tensor, no_grad
from src.utils.errors import ConfigError, ShapeError

Mode = Literal["train", "eval"]


class Classifier(Module):
    """Maps a [B×T×F] batch to [B×2] class probabilities (column 1 = ≥M)."""

    T: int
    F: int

    def logits(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    def forward(self, batch: Union[np.ndarray, Tensor], mode: Mode = "eval") -> Tensor:
        if mode == "train":
            self.train()
        elif mode == "eval":
            self.eval()
        else:
            raise ConfigError(f"mode must be 'train' or 'eval', got '{mode}'")
        x = batch if isinstance(batch, Tensor) else Tensor(batch)
        if x.ndim != 3 or x.shape[1:] != (self.T, self.F):
            raise ShapeError(f"expected batch [B×{self.T}×{self.F}], got {x.shape}")
        return ops.softmax_rows(self.logits(x))

    def predict_proba_batch(self, batch: np.ndarray) -> np.ndarray:
        """Positive-class probabilities in eval mode, one per instance."""
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim == 2:
            batch = batch[None]
        with no_grad():
            return self.forward(batch, mode="eval").data[:, 1].copy()

    def predict_proba(self, instance: np.ndarray) -> float:
        return float(self.predict_proba_batch(np.asarray(instance)[None])[0])

    def predict(self, instance: np.ndarray, threshold: float = 0.5) -> int:
        """1 iff p ≥ threshold."""
        if not 0.0 <= threshold <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
        return int(self.predict_proba(instance) >= threshold)
