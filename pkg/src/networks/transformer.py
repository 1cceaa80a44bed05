"""
Time-series Transformer classifier.

One token per time step carrying the F features. Pipeline: token projection
→ learned positional table (residual add) → N encoder blocks → flatten →
BN / Dense / Dropout head → 2 logits.
"""

from __future__ import annotations

import numpy as np

from src.engine import ops
from src.engine.layers import (
    Activation,
    BatchNorm,
    Dense,
    Dropout,
    Module,
    MultiHeadAttention,
    PositionalEmbedding,
    flatten,
)
from src.engine.tensor import Tensor
from src.models.network import TransformerConfig
from src.networks.base import Classifier


class EncoderBlock(Module):
    """MHA + residual add, batch norm, MLP + residual add."""

    def __init__(
        self, config: TransformerConfig, rng: np.random.Generator, drop_rng: np.random.Generator
    ) -> None:
        d = config.d_model
        self.attention = MultiHeadAttention(d, config.heads, rng)
        self.norm = BatchNorm(d)
        self.mlp_in = Dense(d, config.mlp_hidden, rng)
        self.mlp_act = Activation("gelu")
        self.mlp_dropout = Dropout(config.dropout_rate, drop_rng)
        self.mlp_out = Dense(config.mlp_hidden, d, rng)

    def __call__(self, x: Tensor) -> Tensor:
        x = ops.add(x, self.attention(x))
        x = self.norm(x)
        h = self.mlp_dropout(self.mlp_act(self.mlp_in(x)))
        return ops.add(x, self.mlp_out(h))


class TransformerClassifier(Classifier):
    def __init__(self, config: TransformerConfig, seed: int = 0) -> None:
        self.config = config
        self.seed = seed
        self.T, self.F = config.T, config.F
        rng = np.random.default_rng(seed)
        drop_rng = np.random.default_rng([seed, 1])

        d = config.d_model
        self.token_projection = Dense(config.F, d, rng)
        self.position = PositionalEmbedding(config.T, d, rng)
        self.blocks = [EncoderBlock(config, rng, drop_rng) for _ in range(config.encoder_blocks)]

        self.head_norm = BatchNorm(config.T * d)
        self.head = []
        width = config.T * d
        for hidden in config.head_hidden:
            self.head.extend(
                [
                    Dense(width, hidden, rng),
                    Activation("gelu"),
                    Dropout(config.dropout_rate, drop_rng),
                ]
            )
            width = hidden
        self.classifier = Dense(width, config.n_classes, rng)

    def logits(self, x: Tensor) -> Tensor:
        h = self.position(self.token_projection(x))
        for block in self.blocks:
            h = block(h)
        h = self.head_norm(flatten(h))
        for layer in self.head:
            h = layer(h)
        return self.classifier(h)


def parameter_count(config: TransformerConfig) -> int:
    """Closed-form parameter count of ``TransformerClassifier``."""
    d, T, F, m = config.d_model, config.T, config.F, config.mlp_hidden
    block = 4 * (d * d + d) + 2 * d + (d * m + m) + (m * d + d)
    head = 2 * T * d
    width = T * d
    for hidden in config.head_hidden:
        head += width * hidden + hidden
        width = hidden
    head += width * config.n_classes + config.n_classes
    return (F * d + d) + T * d + config.encoder_blocks * block + head
