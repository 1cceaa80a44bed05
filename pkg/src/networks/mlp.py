"""
MLP baseline over the flattened T·F series.
"""

from __future__ import annotations

import numpy as np

from src.engine.layers import Activation, Dense, Dropout, flatten
from src.engine.tensor import Tensor
from src.models.network import MLPConfig
from src.networks.base import Classifier


class MLPClassifier(Classifier):
    def __init__(self, config: MLPConfig, seed: int = 0) -> None:
        self.config = config
        self.seed = seed
        self.T, self.F = config.T, config.F
        rng = np.random.default_rng(seed)
        drop_rng = np.random.default_rng([seed, 1])

        self.hidden = []
        width = config.T * config.F
        for size in config.hidden:
            self.hidden.extend(
                [
                    Dense(width, size, rng),
                    Activation("gelu"),
                    Dropout(config.dropout_rate, drop_rng),
                ]
            )
            width = size
        self.classifier = Dense(width, config.n_classes, rng)

    def logits(self, x: Tensor) -> Tensor:
        h = flatten(x)
        for layer in self.hidden:
            h = layer(h)
        return self.classifier(h)
