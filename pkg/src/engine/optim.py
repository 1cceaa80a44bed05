"""
SGD and Adam.

Optimizer state is a plain dataclass so trainers can inspect the step
counter and moment accumulators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Literal

import numpy as np

from src.engine.tensor import Tensor
from src.utils.errors import ConfigError, ShapeError, TrainingError

OptimizerKind = Literal["sgd", "adam"]


@dataclass
class OptimizerState:
    kind: OptimizerKind
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def make_optimizer(kind: str, lr: float) -> OptimizerState:
    kind = kind.lower()
    if kind not in ("sgd", "adam"):
        raise ConfigError(f"unknown optimizer '{kind}' (expected sgd or adam)")
    if lr <= 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    return OptimizerState(kind=kind, lr=lr)


def optimizer_step(
    state: OptimizerState, params: Dict[str, Tensor], grads: Dict[str, np.ndarray]
) -> None:
    """Apply one update in place. Parameters without a gradient are left alone."""
    for name, g in grads.items():
        if name not in params:
            continue
        if g.shape != params[name].shape:
            raise ShapeError(
                f"gradient for '{name}' has shape {g.shape}, expected {params[name].shape}"
            )
        if not np.isfinite(g).all():
            raise TrainingError(f"non-finite gradient for parameter '{name}'")

    state.step += 1
    t = state.step

    for name, g in grads.items():
        if name not in params:
            continue
        p = params[name]
        if state.kind == "sgd":
            p.data = p.data - state.lr * g
            continue

        m = state.m.get(name, np.zeros_like(g))
        v = state.v.get(name, np.zeros_like(g))
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.m[name] = m
        state.v[name] = v
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        p.data = p.data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
