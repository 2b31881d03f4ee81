"""Analytic gradients vs central finite differences for every layer type."""

import numpy as np
import pytest

from attentive.tensornet.layers import (
    Conv2D,
    Dense,
    DimensionError,
    Flatten,
    MaxPool2D,
    ReLU,
    Softmax,
    backward,
    forward,
    init_params,
    param_count,
)

H = 1e-5
REL_TOL = 1e-4


def rel_err(a, b):
    denom = max(np.abs(a).max(), np.abs(b).max(), 1e-6)
    return np.abs(a - b).max() / denom


def numeric_grad(objective, arr, h=H):
    g = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        jp = objective()
        flat[i] = orig - h
        jm = objective()
        flat[i] = orig
        gflat[i] = (jp - jm) / (2 * h)
    return g


def check_gradients(specs, x, rng):
    """Compare backward() against finite differences of sum(out * R)."""
    params = init_params(specs, rng)
    out, cache = forward(specs, params, x)
    r = rng.standard_normal(out.shape)

    def objective():
        return float((forward(specs, params, x)[0] * r).sum())

    grads, grad_in = backward(specs, params, cache, r)
    for i, layer in grads.items():
        for key, g in layer.items():
            num = numeric_grad(objective, params[i][key])
            assert rel_err(g, num) < REL_TOL, f"layer {i} {key}: rel err {rel_err(g, num)}"
    num_in = numeric_grad(objective, x)
    assert rel_err(grad_in, num_in) < REL_TOL, f"input grad rel err {rel_err(grad_in, num_in)}"


class TestSingleLayers:
    def test_dense(self):
        rng = np.random.default_rng(0)
        for _ in range(4):
            n, din, dout = rng.integers(1, 7, size=3)
            x = rng.standard_normal((n, din))
            check_gradients([Dense(int(din), int(dout))], x, rng)

    def test_conv2d_various(self):
        rng = np.random.default_rng(1)
        for stride in (1, 2):
            for pad in (0, 1):
                cin, cout = int(rng.integers(1, 4)), int(rng.integers(1, 4))
                hw = int(rng.integers(5, 9))
                x = rng.standard_normal((2, cin, hw, hw))
                check_gradients([Conv2D(cin, cout, 3, stride=stride, pad=pad)], x, rng)

    def test_maxpool_non_overlapping(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((2, 3, 8, 8))
        check_gradients([MaxPool2D(2, 2)], x, rng)

    def test_maxpool_overlapping(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((2, 2, 7, 7))
        check_gradients([MaxPool2D(3, 2)], x, rng)

    def test_relu(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((4, 6))
        x = np.where(np.abs(x) < 0.1, 0.2, x)  # keep clear of the kink
        check_gradients([ReLU()], x, rng)

    def test_softmax(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((5, 4))
        check_gradients([Softmax()], x, rng)

    def test_flatten_passthrough(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((3, 2, 4, 4))
        check_gradients([Flatten()], x, rng)


class TestChains:
    def test_random_three_layer_net(self):
        rng = np.random.default_rng(7)
        specs = [
            Conv2D(1, 2, 3, stride=1, pad=1),
            ReLU(),
            MaxPool2D(2, 2),
            Flatten(),
            Dense(2 * 4 * 4, 4),
            Softmax(),
        ]
        x = rng.standard_normal((2, 1, 8, 8))
        check_gradients(specs, x, rng)

    def test_zero_upstream_grad_zeroes_all(self):
        rng = np.random.default_rng(8)
        specs = [Dense(5, 4), ReLU(), Dense(4, 3), Softmax()]
        params = init_params(specs, rng)
        x = rng.standard_normal((3, 5))
        _, cache = forward(specs, params, x)
        grads, grad_in = backward(specs, params, cache, np.zeros((3, 3)))
        for layer in grads.values():
            for g in layer.values():
                assert not g.any()
        assert not grad_in.any()

    def test_dense_grad_is_outer_product(self):
        rng = np.random.default_rng(9)
        specs = [Dense(4, 3)]
        params = init_params(specs, rng)
        x = rng.standard_normal((1, 4))
        _, cache = forward(specs, params, x)
        g_out = rng.standard_normal((1, 3))
        grads, _ = backward(specs, params, cache, g_out)
        np.testing.assert_allclose(grads[0]["W"], np.outer(x[0], g_out[0]), atol=1e-12)
        np.testing.assert_allclose(grads[0]["b"], g_out[0], atol=1e-12)


class TestForwardContracts:
    def test_dense_identity_passthrough(self):
        specs = [Dense(2, 2)]
        params = {0: {"W": np.eye(2), "b": np.zeros(2)}}
        out, _ = forward(specs, params, np.array([[3.0, 5.0]]))
        np.testing.assert_array_equal(out, [[3.0, 5.0]])

    def test_softmax_equal_logits_uniform(self):
        out, _ = forward([Softmax()], {}, np.full((1, 4), 0.7))
        np.testing.assert_allclose(out, 0.25)

    def test_softmax_rows_sum_to_one_extreme_logits(self):
        rng = np.random.default_rng(10)
        logits = rng.standard_normal((20, 4)) * 500
        out, _ = forward([Softmax()], {}, logits)
        assert out.min() >= 0
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-6)

    def test_conv_matches_sliding_dot_oracle(self):
        rng = np.random.default_rng(11)
        spec = Conv2D(1, 1, 3)
        params = init_params([spec], rng)
        x = rng.standard_normal((1, 1, 5, 5))
        out, _ = forward([spec], params, x)
        w = params[0]["W"][0, 0]
        for i in range(3):
            for j in range(3):
                expected = (x[0, 0, i : i + 3, j : j + 3] * w).sum() + params[0]["b"][0]
                assert abs(out[0, 0, i, j] - expected) < 1e-10

    def test_shape_mismatch_names_layer(self):
        with pytest.raises(DimensionError, match="layer 0"):
            forward([Dense(3, 2)], {0: {"W": np.zeros((3, 2)), "b": np.zeros(2)}},
                    np.zeros((1, 4)))

    def test_stale_cache_rejected(self):
        rng = np.random.default_rng(12)
        specs = [Dense(3, 2), Softmax()]
        params = init_params(specs, rng)
        _, cache = forward(specs, params, rng.standard_normal((2, 3)))
        with pytest.raises(ValueError, match="cache"):
            backward(specs, params, cache[:1], np.zeros((2, 2)))

    def test_param_count_formula(self):
        specs = [Conv2D(1, 8, 3, pad=1), ReLU(), Dense(10, 4)]
        assert param_count(specs) == (8 * 9 + 8) + (10 * 4 + 4)
