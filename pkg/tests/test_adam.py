"""Adam optimizer recurrence."""

import numpy as np

from attentive.tensornet.adam import adam_init, adam_step


def scalar_params(value=1.0):
    return {0: {"W": np.array([value])}}


def test_zero_gradients_leave_params_unchanged():
    params = {0: {"W": np.full((3, 3), 2.0), "b": np.zeros(3)}}
    state = adam_init(params)
    grads = {0: {"W": np.zeros((3, 3)), "b": np.zeros(3)}}
    adam_step(params, grads, state)
    np.testing.assert_array_equal(params[0]["W"], 2.0)
    assert state.step == 1


def test_first_step_moves_by_learning_rate():
    params = scalar_params(1.0)
    state = adam_init(params, lr=0.001)
    adam_step(params, {0: {"W": np.array([1.0])}}, state)
    # bias-corrected first step: m_hat = v_hat = 1 -> delta = lr / (1 + eps)
    assert abs(params[0]["W"][0] - (1.0 - 0.001)) < 1e-9


def test_hand_evaluated_two_steps():
    lr, b1, b2, eps = 0.001, 0.9, 0.999, 1e-8
    params = scalar_params(0.5)
    state = adam_init(params, lr=lr)
    w = 0.5
    m = v = 0.0
    for step, g in enumerate((1.0, -2.0), start=1):
        adam_step(params, {0: {"W": np.array([g])}}, state)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**step)
        vh = v / (1 - b2**step)
        w -= lr * mh / (np.sqrt(vh) + eps)
        assert abs(params[0]["W"][0] - w) < 1e-15


def test_two_runs_bit_identical():
    def run():
        rng = np.random.default_rng(77)
        params = {0: {"W": rng.standard_normal((4, 4))}}
        state = adam_init(params)
        for _ in range(25):
            grads = {0: {"W": rng.standard_normal((4, 4))}}
            adam_step(params, grads, state)
        return params[0]["W"]

    np.testing.assert_array_equal(run(), run())


def test_moment_shapes_mirror_params():
    params = {0: {"W": np.zeros((2, 3)), "b": np.zeros(3)}, 2: {"W": np.zeros((5,))}}
    state = adam_init(params)
    for i, layer in params.items():
        for key, arr in layer.items():
            assert state.m[i][key].shape == arr.shape
            assert state.v[i][key].shape == arr.shape
