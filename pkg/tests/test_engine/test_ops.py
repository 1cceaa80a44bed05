"""
Tests for tensor ops and reverse-mode gradients.
"""

import numpy as np
import pytest

from src.engine import Tape, Tensor, backward, no_grad, ops
from src.utils.errors import ConfigError, ContractError, NumericalError, ShapeError
from tests.helpers import numerical_gradient, relative_error


def _param(values, name):
    return Tensor(values, requires_grad=True, name=name)


class TestMatmul:
    def test_gradient_matches_finite_differences(self, rng):
        a = _param(rng.normal(size=(3, 4)), "a")
        b = _param(rng.normal(size=(4, 2)), "b")
        w = rng.normal(size=(3, 2))

        def loss_value():
            return float((a.data @ b.data * w).sum())

        loss = ops.sum_all(ops.mul(ops.matmul(a, b), Tensor(w)))
        grads = backward(loss)

        assert relative_error(grads["a"], numerical_gradient(loss_value, a.data)) < 1e-4
        assert relative_error(grads["b"], numerical_gradient(loss_value, b.data)) < 1e-4

    def test_inner_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


class TestSoftmax:
    def test_large_logits_do_not_overflow(self):
        out = ops.softmax_rows(Tensor([[1000.0, 0.0]])).data
        assert np.isfinite(out).all()
        assert out[0, 0] == pytest.approx(1.0)
        assert out[0, 1] == pytest.approx(0.0, abs=1e-300)

    def test_rows_sum_to_one(self, rng):
        out = ops.softmax_rows(Tensor(rng.normal(size=(5, 3)))).data
        np.testing.assert_allclose(out.sum(axis=1), 1.0)

    def test_gradient_matches_finite_differences(self, rng):
        x = _param(rng.normal(size=(2, 3)), "x")
        w = rng.normal(size=(2, 3))

        def loss_value():
            shifted = x.data - x.data.max(axis=1, keepdims=True)
            e = np.exp(shifted)
            return float((e / e.sum(axis=1, keepdims=True) * w).sum())

        grads = backward(ops.sum_all(ops.mul(ops.softmax_rows(x), Tensor(w))))
        assert relative_error(grads["x"], numerical_gradient(loss_value, x.data)) < 1e-4


class TestBatchNorm:
    def test_train_mode_normalizes_channels(self, rng):
        x = Tensor(rng.normal(3.0, 2.0, size=(64, 4)))
        state = ops.BatchNormState(4)
        out = ops.batch_norm(x, Tensor(np.ones(4)), Tensor(np.zeros(4)), state, training=True)
        np.testing.assert_allclose(out.data.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(out.data.var(axis=0), 1.0, atol=1e-4)

    def test_constant_channel_maps_to_beta(self):
        x = Tensor(np.full((8, 2), 7.0))
        beta = np.array([0.25, -1.0])
        out = ops.batch_norm(
            x, Tensor(np.ones(2)), Tensor(beta), ops.BatchNormState(2), training=True
        )
        assert np.isfinite(out.data).all()
        np.testing.assert_allclose(out.data, np.broadcast_to(beta, (8, 2)))

    def test_eval_mode_uses_running_statistics(self):
        state = ops.BatchNormState(1)
        state.running_mean = np.array([2.0])
        state.running_var = np.array([4.0])
        out = ops.batch_norm(
            Tensor([[4.0]]), Tensor([1.0]), Tensor([0.0]), state, training=False
        )
        assert out.data[0, 0] == pytest.approx(2.0 / np.sqrt(4.0 + state.eps))

    def test_train_gradient_matches_finite_differences(self, rng):
        x = _param(rng.normal(size=(5, 3)), "x")
        gamma = _param(rng.normal(size=3), "gamma")
        beta = _param(rng.normal(size=3), "beta")
        w = rng.normal(size=(5, 3))

        def loss_value():
            mu = x.data.mean(axis=0)
            var = x.data.var(axis=0)
            xhat = (x.data - mu) / np.sqrt(var + 1e-5)
            return float(((xhat * gamma.data + beta.data) * w).sum())

        out = ops.batch_norm(x, gamma, beta, ops.BatchNormState(3), training=True)
        grads = backward(ops.sum_all(ops.mul(out, Tensor(w))))
        for t in (x, gamma, beta):
            assert relative_error(grads[t.name], numerical_gradient(loss_value, t.data)) < 1e-4


class TestElementwise:
    def test_gelu_gradient(self, rng):
        x = _param(rng.normal(size=(4, 3)), "x")

        def loss_value():
            v = x.data
            inner = np.sqrt(2 / np.pi) * (v + 0.044715 * v**3)
            return float((0.5 * v * (1 + np.tanh(inner))).sum())

        grads = backward(ops.sum_all(ops.gelu(x)))
        assert relative_error(grads["x"], numerical_gradient(loss_value, x.data)) < 1e-4

    def test_log_clamps_at_floor(self):
        out = ops.log(Tensor([0.0, 1.0]))
        assert out.data[0] == pytest.approx(np.log(1e-12))
        assert out.data[1] == 0.0

    def test_dropout_is_identity_in_eval_mode(self, rng):
        x = Tensor(rng.normal(size=(3, 3)))
        assert ops.dropout(x, 0.5, training=False, rng=None) is x

    def test_dropout_preserves_mean_in_train_mode(self):
        x = Tensor(np.ones(100_000))
        out = ops.dropout(x, 0.5, training=True, rng=np.random.default_rng(0)).data
        assert set(np.unique(out)) == {0.0, 2.0}
        assert abs(out.mean() - 1.0) < 0.02

    @pytest.mark.parametrize("rate", [1.0, 1.5, -0.1])
    def test_dropout_rate_outside_unit_interval(self, rate):
        with pytest.raises(ConfigError):
            ops.dropout(Tensor(np.ones(4)), rate, training=True, rng=np.random.default_rng(0))

    def test_pick_gathers_one_entry_per_row(self):
        x = Tensor([[0.1, 0.9], [0.7, 0.3]])
        np.testing.assert_allclose(ops.pick(x, np.array([1, 0])).data, [0.9, 0.7])


class TestBackward:
    def test_shared_node_is_visited_once(self):
        x = _param([3.0], "x")
        square = ops.mul(x, x)
        y = ops.sum_all(ops.add(square, square))
        grads = backward(y)
        assert grads["x"][0] == pytest.approx(12.0)
        assert len(Tape(y)) == 4

    def test_operator_sugar(self, rng):
        a = _param(rng.normal(size=(2, 3)), "a")
        b = _param(rng.normal(size=(3, 2)), "b")
        c = _param(rng.normal(size=(2, 2)), "c")
        loss = ops.sum_all(-(a @ b) + c * c - c)
        grads = backward(loss)
        ones = np.ones((2, 2))
        np.testing.assert_allclose(grads["a"], -ones @ b.data.T)
        np.testing.assert_allclose(grads["b"], -a.data.T @ ones)
        np.testing.assert_allclose(grads["c"], 2 * c.data - 1)

        tape = Tape(loss)
        assert list(tape)[-1] is loss
        assert {n.name for n in tape if n.name} == {"a", "b", "c"}

    def test_non_scalar_loss_is_rejected(self):
        with pytest.raises(ContractError):
            backward(_param(np.ones(3), "x"))

    def test_non_finite_loss_is_rejected(self):
        x = _param([1.0], "x")
        with pytest.raises(NumericalError):
            backward(ops.sum_all(ops.scale(x, np.inf)))

    def test_no_grad_records_nothing(self):
        x = _param([1.0, 2.0], "x")
        with no_grad():
            y = ops.sum_all(ops.mul(x, x))
        assert not y.requires_grad
        assert backward(y) == {}

    def test_composed_network_gradient(self, rng):
        x = rng.normal(size=(4, 3))
        w1 = _param(rng.normal(size=(3, 5)), "w1")
        b1 = _param(rng.normal(size=5), "b1")
        w2 = _param(rng.normal(size=(5, 2)), "w2")
        labels = np.array([0, 1, 1, 0])

        def loss_value():
            h = np.maximum(x @ w1.data + b1.data, 0.0) @ w2.data
            e = np.exp(h - h.max(axis=1, keepdims=True))
            p = e / e.sum(axis=1, keepdims=True)
            return float(-np.log(p[np.arange(4), labels]).sum())

        h = ops.relu(ops.add_bias(ops.matmul(Tensor(x), w1), b1))
        probs = ops.softmax_rows(ops.matmul(h, w2))
        loss = ops.scale(ops.sum_all(ops.log(ops.pick(probs, labels))), -1.0)
        grads = backward(loss)
        for t in (w1, b1, w2):
            assert relative_error(grads[t.name], numerical_gradient(loss_value, t.data)) < 1e-4
