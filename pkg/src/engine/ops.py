"""
Differentiable primitives.

Each op computes its forward value with numpy and registers a VJP that maps
the output gradient to one gradient per input. Broadcasting is limited to
``add_bias`` (a trailing-shape operand added over leading axes).
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from src.engine.tensor import Tensor, make_node
from src.utils.errors import ConfigError, ContractError, ShapeError

_GELU_C = math.sqrt(2.0 / math.pi)


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return make_node(a.data + b.data, (a, b), "add", lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return make_node(a.data - b.data, (a, b), "sub", lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return make_node(a.data * b.data, (a, b), "mul", lambda g: (g * b.data, g * a.data))


def scale(x: Tensor, factor) -> Tensor:
    """Multiply by a constant scalar or a constant array of the same shape."""
    factor = np.asarray(factor, dtype=np.float64)
    if factor.ndim and factor.shape != x.shape:
        raise ShapeError(f"scale: factor shape {factor.shape} vs tensor {x.shape}")
    return make_node(x.data * factor, (x,), "scale", lambda g: (g * factor,))


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """x + bias where bias matches the trailing dimensions of x."""
    k = bias.ndim
    if k == 0 or x.shape[x.ndim - k :] != bias.shape:
        raise ShapeError(f"add_bias: bias {bias.shape} does not match trailing dims of {x.shape}")
    lead = tuple(range(x.ndim - k))

    def vjp(g):
        return g, g.sum(axis=lead) if lead else g

    return make_node(x.data + bias.data, (x, bias), "add_bias", vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a [m×k] and b [k×n]."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul: expected 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} x {b.shape}")

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return make_node(a.data @ b.data, (a, b), "matmul", vjp)


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over identical leading dimensions."""
    if a.ndim < 3 or a.ndim != b.ndim or a.shape[:-2] != b.shape[:-2]:
        raise ShapeError(f"bmm: incompatible batch shapes {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"bmm: inner dimensions differ, {a.shape} x {b.shape}")

    def vjp(g):
        return g @ np.swapaxes(b.data, -1, -2), np.swapaxes(a.data, -1, -2) @ g

    return make_node(a.data @ b.data, (a, b), "bmm", vjp)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    data = x.data.reshape(shape)
    return make_node(data, (x,), "reshape", lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return make_node(
        np.transpose(x.data, axes), (x,), "transpose", lambda g: (np.transpose(g, inverse),)
    )


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_node(x.data * mask, (x,), "relu", lambda g: (g * mask,))


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh form."""
    v = x.data
    inner = _GELU_C * (v + 0.044715 * v**3)
    t = np.tanh(inner)
    out = 0.5 * v * (1.0 + t)

    def vjp(g):
        d_inner = _GELU_C * (1.0 + 3 * 0.044715 * v**2)
        return (g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t**2) * d_inner),)

    return make_node(out, (x,), "gelu", vjp)


def log(x: Tensor, floor: float = 1e-12) -> Tensor:
    """Natural log with inputs clamped from below at ``floor``."""
    clamped = np.maximum(x.data, floor)
    live = x.data > floor

    def vjp(g):
        return (np.where(live, g / clamped, 0.0),)

    return make_node(np.log(clamped), (x,), "log", vjp)


def softmax_rows(x: Tensor) -> Tensor:
    """Softmax along the last axis with max subtraction."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def vjp(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return make_node(out, (x,), "softmax", vjp)


def sum_all(x: Tensor) -> Tensor:
    return make_node(
        np.array(x.data.sum()), (x,), "sum", lambda g: (np.full(x.shape, float(g)),)
    )


def pick(x: Tensor, index: np.ndarray) -> Tensor:
    """Row-wise gather: out[n] = x[n, index[n]] for a 2-D x."""
    index = np.asarray(index, dtype=np.int64)
    if x.ndim != 2 or index.shape != (x.shape[0],):
        raise ShapeError(f"pick: need [N×C] input and N indices, got {x.shape}, {index.shape}")
    rows = np.arange(x.shape[0])

    def vjp(g):
        full = np.zeros_like(x.data)
        full[rows, index] = g
        return (full,)

    return make_node(x.data[rows, index], (x,), "pick", vjp)


class BatchNormState:
    """Running statistics of one batch-norm layer."""

    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5) -> None:
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self.momentum = momentum
        self.eps = eps


def batch_norm(
    x: Tensor, gamma: Tensor, beta: Tensor, state: BatchNormState, training: bool
) -> Tensor:
    """
    Per-channel normalization of a 2-D [N×C] input.

    Train mode uses batch statistics and updates the running averages;
    eval mode is the fixed affine map given by the running statistics.
    """
    if x.ndim != 2:
        raise ShapeError(f"batch_norm: expected [N×C] input, got {x.shape}")
    n, c = x.shape
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"batch_norm: γ/β shapes {gamma.shape}/{beta.shape} vs {c} channels")
    if n == 0:
        raise ContractError("batch_norm: empty batch")

    if training:
        mu = x.data.mean(axis=0)
        var = x.data.var(axis=0)
        inv_std = 1.0 / np.sqrt(var + state.eps)
        xhat = (x.data - mu) * inv_std
        m = state.momentum
        state.running_mean = m * state.running_mean + (1.0 - m) * mu
        state.running_var = m * state.running_var + (1.0 - m) * var

        def vjp(g):
            dxhat = g * gamma.data
            dx = (inv_std / n) * (
                n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
            )
            return dx, (g * xhat).sum(axis=0), g.sum(axis=0)

    else:
        inv_std = 1.0 / np.sqrt(state.running_var + state.eps)
        xhat = (x.data - state.running_mean) * inv_std

        def vjp(g):
            return g * gamma.data * inv_std, (g * xhat).sum(axis=0), g.sum(axis=0)

    out = xhat * gamma.data + beta.data
    return make_node(out, (x, gamma, beta), "batch_norm", vjp)


def dropout(
    x: Tensor, rate: float, training: bool, rng: Optional[np.random.Generator]
) -> Tensor:
    """Inverted dropout; identity in eval mode or at rate 0."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ContractError("dropout in train mode needs a random generator")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return make_node(x.data * keep, (x,), "dropout", lambda g: (g * keep,))
