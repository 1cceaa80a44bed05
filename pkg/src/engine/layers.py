"""
Layer building blocks over the tensor engine.

``Module`` keeps named parameters and batch-norm buffers in attribute order,
so parameter maps, checkpoints and optimizer state line up deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterator, Tuple

import numpy as np

from src.engine import ops
from src.engine.tensor import Tensor
from src.utils.errors import ConfigError, ShapeError


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Module:
    """Container of parameters, child modules and batch-norm states."""

    training: bool = True

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for attr, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield prefix + attr, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{prefix}{attr}.")
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{prefix}{attr}.{i}.")

    def parameters(self) -> Dict[str, Tensor]:
        """Parameter map keyed by dotted name; names are also set on the tensors."""
        params = {}
        for name, tensor in self.named_parameters():
            tensor.name = name
            params[name] = tensor
        return params

    def named_bn_states(self, prefix: str = "") -> Iterator[Tuple[str, ops.BatchNormState]]:
        for attr, value in vars(self).items():
            if isinstance(value, ops.BatchNormState):
                yield prefix + attr, value
            elif isinstance(value, Module):
                yield from value.named_bn_states(f"{prefix}{attr}.")
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_bn_states(f"{prefix}{attr}.{i}.")

    def modules(self) -> Iterator["Module"]:
        yield self
        for value in vars(self).values():
            if isinstance(value, Module):
                yield from value.modules()
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, Module):
                        yield from item.modules()

    def train(self) -> "Module":
        for module in self.modules():
            module.training = True
        return self

    def eval(self) -> "Module":
        for module in self.modules():
            module.training = False
        return self

    def num_parameters(self) -> int:
        return sum(t.size for t in self.parameters().values())


class Dense(Module):
    """Affine map over the last axis."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator) -> None:
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Tensor(
            glorot_uniform(rng, in_features, out_features, (in_features, out_features)),
            requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_features), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_features:
            raise ShapeError(f"Dense expects last dim {self.in_features}, got {x.shape}")
        lead = x.shape[:-1]
        flat = ops.reshape(x, (-1, self.in_features)) if x.ndim != 2 else x
        out = ops.add_bias(ops.matmul(flat, self.weight), self.bias)
        return ops.reshape(out, lead + (self.out_features,)) if x.ndim != 2 else out


class BatchNorm(Module):
    """Batch normalization over every axis but the last (channels)."""

    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5) -> None:
        self.channels = channels
        self.gamma = Tensor(np.ones(channels), requires_grad=True)
        self.beta = Tensor(np.zeros(channels), requires_grad=True)
        self.state = ops.BatchNormState(channels, momentum, eps)

    def __call__(self, x: Tensor) -> Tensor:
        shape = x.shape
        flat = ops.reshape(x, (-1, self.channels)) if x.ndim != 2 else x
        out = ops.batch_norm(flat, self.gamma, self.beta, self.state, self.training)
        return ops.reshape(out, shape) if x.ndim != 2 else out


class Dropout(Module):
    def __init__(self, rate: float, rng: np.random.Generator) -> None:
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng

    def __call__(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.rate, self.training, self.rng)


class PositionalEmbedding(Module):
    """Learned T×d position table added to the token sequence."""

    def __init__(self, length: int, dim: int, rng: np.random.Generator) -> None:
        self.length = length
        self.table = Tensor(glorot_uniform(rng, length, dim, (length, dim)), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add_bias(x, self.table)


@dataclass
class AttentionOutput:
    output: Tensor
    weights: np.ndarray  # [B, h, T, T]


def multi_head_attention(x: Tensor, attn: "MultiHeadAttention") -> AttentionOutput:
    """Scaled dot-product attention with ``attn.heads`` heads over x [B×T×d]."""
    if x.ndim != 3 or x.shape[-1] != attn.dim:
        raise ShapeError(f"attention expects [B×T×{attn.dim}], got {x.shape}")
    b, t, d = x.shape
    h, dh = attn.heads, attn.head_dim

    def split_heads(proj: Tensor) -> Tensor:
        return ops.transpose(ops.reshape(proj, (b, t, h, dh)), (0, 2, 1, 3))

    q = split_heads(attn.query(x))
    k = split_heads(attn.key(x))
    v = split_heads(attn.value(x))

    scores = ops.scale(ops.bmm(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(dh))
    weights = ops.softmax_rows(scores)
    context = ops.bmm(weights, v)
    merged = ops.reshape(ops.transpose(context, (0, 2, 1, 3)), (b, t, d))
    return AttentionOutput(output=attn.output(merged), weights=weights.data)


class MultiHeadAttention(Module):
    def __init__(self, dim: int, heads: int, rng: np.random.Generator) -> None:
        if heads < 1 or dim % heads != 0:
            raise ConfigError(f"model width {dim} is not divisible by {heads} heads")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.query = Dense(dim, dim, rng)
        self.key = Dense(dim, dim, rng)
        self.value = Dense(dim, dim, rng)
        self.output = Dense(dim, dim, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return multi_head_attention(x, self).output


class Activation(Module):
    def __init__(self, kind: str = "gelu") -> None:
        if kind not in ("gelu", "relu"):
            raise ConfigError(f"unknown activation '{kind}'")
        self.kind = kind

    def __call__(self, x: Tensor) -> Tensor:
        return ops.gelu(x) if self.kind == "gelu" else ops.relu(x)


def flatten(x: Tensor) -> Tensor:
    return ops.reshape(x, (x.shape[0], -1))


def set_parameters(module: Module, values: Dict[str, np.ndarray]) -> None:
    """Overwrite parameter values by name (shapes must match)."""
    params = module.parameters()
    for name, value in values.items():
        if name not in params:
            raise ShapeError(f"unknown parameter '{name}'")
        value = np.asarray(value, dtype=np.float64)
        if value.shape != params[name].shape:
            raise ShapeError(f"parameter '{name}': shape {value.shape} vs {params[name].shape}")
        params[name].data = value.copy()


def snapshot(module: Module) -> Dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in module.parameters().items()}


def bn_snapshot(module: Module) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    return {
        name: (s.running_mean.copy(), s.running_var.copy())
        for name, s in module.named_bn_states()
    }


def restore_bn(module: Module, stats: Dict[str, Tuple[np.ndarray, np.ndarray]]) -> None:
    states = dict(module.named_bn_states())
    for name, (mean, var) in stats.items():
        states[name].running_mean = np.asarray(mean, dtype=np.float64).copy()
        states[name].running_var = np.asarray(var, dtype=np.float64).copy()
