"""
Tests for layers and optimizers.
"""

import numpy as np
import pytest

from src.engine import Tensor, backward, make_optimizer, no_grad, ops, optimizer_step
from src.engine.layers import BatchNorm, Dense, MultiHeadAttention, multi_head_attention
from src.utils.errors import ConfigError, ShapeError, TrainingError
from tests.helpers import numerical_gradient, relative_error


class TestDense:
    def test_applies_over_last_axis(self, rng):
        layer = Dense(3, 2, rng)
        x = rng.normal(size=(4, 5, 3))
        out = layer(Tensor(x))
        assert out.shape == (4, 5, 2)
        np.testing.assert_allclose(out.data, x @ layer.weight.data + layer.bias.data)

    def test_rejects_wrong_width(self, rng):
        with pytest.raises(ShapeError):
            Dense(3, 2, rng)(Tensor(np.ones((2, 4))))


class TestAttention:
    def test_weights_are_row_stochastic(self, rng):
        attn = MultiHeadAttention(4, 2, rng)
        result = multi_head_attention(Tensor(rng.normal(size=(2, 3, 4))), attn)
        assert result.weights.shape == (2, 2, 3, 3)
        np.testing.assert_allclose(result.weights.sum(axis=-1), 1.0)

    def test_width_must_divide_by_heads(self, rng):
        with pytest.raises(ConfigError):
            MultiHeadAttention(6, 4, rng)

    def test_gradient_matches_finite_differences(self, rng):
        attn = MultiHeadAttention(4, 2, rng)
        params = attn.parameters()
        x = Tensor(rng.normal(size=(2, 3, 4)), requires_grad=True, name="x")
        w = rng.normal(size=(2, 3, 4))

        def loss_value():
            with no_grad():
                return float((attn(Tensor(x.data)).data * w).sum())

        grads = backward(ops.sum_all(ops.mul(attn(x), Tensor(w))))
        assert relative_error(grads["x"], numerical_gradient(loss_value, x.data)) < 1e-4
        for name in ("query.weight", "value.bias", "output.weight"):
            numeric = numerical_gradient(loss_value, params[name].data)
            assert relative_error(grads[name], numeric) < 1e-4


class TestBatchNormLayer:
    def test_normalizes_trailing_channels_of_3d_input(self, rng):
        layer = BatchNorm(4)
        out = layer(Tensor(rng.normal(5.0, 3.0, size=(6, 7, 4)))).data.reshape(-1, 4)
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-9)


class TestOptimizers:
    def test_adam_first_step_closed_form(self):
        p = Tensor([1.0], requires_grad=True, name="p")
        state = make_optimizer("adam", 0.01)
        optimizer_step(state, {"p": p}, {"p": np.array([0.3])})
        assert p.data[0] == pytest.approx(1.0 - 0.01 * 0.3 / (0.3 + 1e-8))
        assert state.step == 1

    def test_sgd_step(self):
        p = Tensor([1.0, -2.0], requires_grad=True, name="p")
        optimizer_step(make_optimizer("sgd", 0.5), {"p": p}, {"p": np.array([2.0, -2.0])})
        np.testing.assert_allclose(p.data, [0.0, -1.0])

    def test_adam_minimizes_quadratic(self):
        p = Tensor([1.0], requires_grad=True, name="p")
        state = make_optimizer("adam", 0.1)
        for _ in range(50):
            optimizer_step(state, {"p": p}, {"p": 2.0 * p.data})
        assert abs(p.data[0]) < 0.5

    def test_non_finite_gradient_is_rejected(self):
        p = Tensor([1.0], requires_grad=True, name="p")
        with pytest.raises(TrainingError):
            optimizer_step(make_optimizer("adam", 0.1), {"p": p}, {"p": np.array([np.nan])})

    def test_unknown_optimizer(self):
        with pytest.raises(ConfigError):
            make_optimizer("rmsprop", 0.1)
