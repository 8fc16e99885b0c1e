import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpfl_pareto.datasets import Samples
from dpfl_pareto.models import (
    ModelArch,
    ModelKind,
    eval_test_loss,
    init_params,
    loss_and_grad,
    loss_grad_arrays,
    params_from_bytes,
    params_to_bytes,
    sgd_step,
)


def finite_diff_grad(arch, w, X, y, h=1e-5):
    """Central-difference oracle, independent of the analytic path."""
    grad = np.empty_like(w)
    for i in range(len(w)):
        wp, wm = w.copy(), w.copy()
        wp[i] += h
        wm[i] -= h
        lp, _ = loss_grad_arrays(arch, wp, X, y)
        lm, _ = loss_grad_arrays(arch, wm, X, y)
        grad[i] = (lp - lm) / (2 * h)
    return grad


def random_batch(rng, n, d, classes):
    return rng.random((n, d)), rng.integers(0, classes, size=n)


class TestParamCounts:
    def test_lr_count(self):
        arch = ModelArch(ModelKind.LOGISTIC_REGRESSION, feature_dim=4, num_classes=3)
        assert arch.param_count == 4 * 3 + 3 == 15
        assert len(init_params(arch, seed=0).weights) == 15

    def test_mlp_count(self):
        arch = ModelArch(ModelKind.MLP, feature_dim=4, num_classes=3, hidden_units=8)
        assert arch.param_count == 4 * 8 + 8 + 8 * 3 + 3 == 67

    def test_init_deterministic(self, mlp_arch):
        a = init_params(mlp_arch, seed=77)
        b = init_params(mlp_arch, seed=77)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert not np.array_equal(a.weights, init_params(mlp_arch, seed=78).weights)

    def test_init_within_fan_bounds(self, lr_arch):
        w = init_params(lr_arch, seed=0).weights
        s = math.sqrt(6.0 / (lr_arch.feature_dim + lr_arch.num_classes))
        assert np.all(np.abs(w) <= s)


class TestLossAndGrad:
    def test_zero_weights_uniform_softmax(self, rng):
        for classes in (2, 5, 10):
            arch = ModelArch(ModelKind.LOGISTIC_REGRESSION, 6, classes)
            X, y = random_batch(rng, 32, 6, classes)
            loss, _ = loss_grad_arrays(arch, np.zeros(arch.param_count), X, y)
            assert loss == pytest.approx(math.log(classes), rel=1e-12)

    def test_duplicated_batch_invariance(self, rng, lr_arch):
        X, y = random_batch(rng, 10, 12, 2)
        params = init_params(lr_arch, seed=3)
        l1, g1 = loss_and_grad(params, Samples(features=X, labels=y))
        l2, g2 = loss_and_grad(
            params, Samples(features=np.vstack([X, X]), labels=np.concatenate([y, y]))
        )
        assert l1 == pytest.approx(l2, rel=1e-12)
        np.testing.assert_allclose(g1, g2, rtol=1e-12)

    def test_gradient_matches_finite_differences_lr(self, rng):
        arch = ModelArch(ModelKind.LOGISTIC_REGRESSION, 5, 2)
        w = rng.standard_normal(arch.param_count) * 0.5
        X, y = random_batch(rng, 8, 5, 2)
        _, g = loss_grad_arrays(arch, w, X, y)
        fd = finite_diff_grad(arch, w, X, y)
        assert np.max(np.abs(g - fd)) < 1e-6

    def test_gradient_matches_finite_differences_mlp(self, rng):
        arch = ModelArch(ModelKind.MLP, 5, 3, hidden_units=4)
        w = rng.standard_normal(arch.param_count) * 0.5
        X, y = random_batch(rng, 8, 5, 3)
        _, g = loss_grad_arrays(arch, w, X, y)
        fd = finite_diff_grad(arch, w, X, y)
        denom = np.maximum(1.0, np.abs(fd))
        assert np.max(np.abs(g - fd) / denom) < 1e-5

    def test_dimension_mismatch(self, lr_arch, rng):
        params = init_params(lr_arch, seed=0)
        X, y = random_batch(rng, 4, 7, 2)
        with pytest.raises(ValueError):
            loss_and_grad(params, Samples(features=X, labels=y))

    def test_empty_batch_rejected(self, lr_arch):
        params = init_params(lr_arch, seed=0)
        with pytest.raises(ValueError):
            loss_and_grad(
                params, Samples(features=np.empty((0, 12)), labels=np.empty(0, dtype=int))
            )


class TestSgdStep:
    def test_basic_step(self, lr_arch):
        params = init_params(lr_arch, seed=0)
        w = params.weights.copy()
        w[:2] = [1.0, 2.0]
        params = sgd_step(params, np.zeros_like(w), eta=1.0)  # no-op to copy type
        from dpfl_pareto.models import ModelParams

        params = ModelParams(arch=lr_arch, weights=w)
        g = np.zeros_like(w)
        g[:2] = 1.0
        stepped = sgd_step(params, g, eta=0.5)
        assert stepped.weights[0] == 0.5
        assert stepped.weights[1] == 1.5

    def test_zero_gradient_is_identity(self, lr_arch):
        params = init_params(lr_arch, seed=1)
        stepped = sgd_step(params, np.zeros(lr_arch.param_count), eta=0.1)
        np.testing.assert_array_equal(stepped.weights, params.weights)

    def test_two_steps_linear(self, lr_arch, rng):
        params = init_params(lr_arch, seed=2)
        g1 = rng.standard_normal(lr_arch.param_count)
        g2 = rng.standard_normal(lr_arch.param_count)
        a = sgd_step(sgd_step(params, g1, 0.3), g2, 0.3)
        b = sgd_step(params, g1 + g2, 0.3)
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12)


class TestEvalTestLoss:
    def test_zero_weight_ten_classes(self, rng):
        arch = ModelArch(ModelKind.LOGISTIC_REGRESSION, 4, 10)
        from dpfl_pareto.models import ModelParams

        params = ModelParams(arch=arch, weights=np.zeros(arch.param_count))
        X, y = random_batch(rng, 30, 4, 10)
        loss = eval_test_loss(params, Samples(features=X, labels=y))
        assert loss == pytest.approx(math.log(10), rel=1e-12)

    def test_order_invariance(self, rng, lr_arch):
        params = init_params(lr_arch, seed=5)
        X, y = random_batch(rng, 40, 12, 2)
        loss1 = eval_test_loss(params, Samples(features=X, labels=y))
        perm = rng.permutation(40)
        loss2 = eval_test_loss(params, Samples(features=X[perm], labels=y[perm]))
        assert loss1 == pytest.approx(loss2, rel=1e-12)

    def test_reference_sgd_converges_below_0_1(self, small_bundle, lr_arch):
        # full-batch reference descent on separable blobs
        from dpfl_pareto.models import ModelParams

        train = small_bundle.train
        params = init_params(lr_arch, seed=0)
        batch = Samples(features=train.features, labels=train.labels)
        for _ in range(800):
            _, g = loss_and_grad(params, batch)
            params = sgd_step(params, g, eta=0.1)
        assert eval_test_loss(params, small_bundle.test_set) < 0.1


class TestLossDecreaseProperty:
    @settings(max_examples=100)
    @given(seed=st.integers(0, 10_000))
    def test_small_step_never_increases_full_batch_loss(self, seed):
        # normalized features in [0, 1]; eta small enough for descent
        rng = np.random.default_rng(seed)
        arch = ModelArch(ModelKind.LOGISTIC_REGRESSION, 6, 3)
        w = rng.standard_normal(arch.param_count)
        X, y = rng.random((20, 6)), rng.integers(0, 3, size=20)
        loss0, g = loss_grad_arrays(arch, w, X, y)
        loss1, _ = loss_grad_arrays(arch, w - 1e-3 * g, X, y)
        assert loss1 <= loss0 + 1e-15


class TestSerialization:
    def test_round_trip_lr(self, lr_arch):
        params = init_params(lr_arch, seed=13)
        restored = params_from_bytes(params_to_bytes(params))
        assert restored.arch == params.arch
        np.testing.assert_array_equal(restored.weights, params.weights)

    def test_round_trip_mlp(self, mlp_arch):
        params = init_params(mlp_arch, seed=14)
        restored = params_from_bytes(params_to_bytes(params))
        assert restored.arch == params.arch
        np.testing.assert_array_equal(restored.weights, params.weights)

    def test_bad_magic(self, lr_arch):
        blob = b"XXXX" + params_to_bytes(init_params(lr_arch, seed=0))[4:]
        with pytest.raises(ValueError):
            params_from_bytes(blob)
