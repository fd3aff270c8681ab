import numpy as np
import pytest

from landgen.errors import ContractError, ShapeError, TrainingDivergedError
from landgen.neural_core import (
    AdamState,
    DenseLayer,
    adam_step,
    dense_backward,
    dense_forward,
    finite_difference_check,
    glorot_layer,
)
from landgen.rng import Rng


def test_dense_forward_identity_weights_pass_through():
    layer = DenseLayer(weight=np.eye(4), bias=np.zeros(4), activation="identity")
    x = np.array([1.0, -2.0, 3.0, 0.5])
    out, _ = dense_forward(layer, x)
    assert np.array_equal(out[0], x)


def test_dense_forward_relu_clamps():
    layer = DenseLayer(weight=np.eye(2), bias=np.zeros(2), activation="relu")
    out, _ = dense_forward(layer, np.array([-1.0, 2.0]))
    assert np.array_equal(out[0], [0.0, 2.0])


def test_dense_forward_matches_naive_recomputation():
    rng = Rng(3, 0)
    layer = glorot_layer(rng, 7, 5, "sigmoid")
    x = rng.normals(3 * 7, size=(3, 7))
    out, _ = dense_forward(layer, x)
    naive = np.empty((3, 5))
    for b in range(3):
        for o in range(5):
            acc = layer.bias[o]
            for i in range(7):
                acc += x[b, i] * layer.weight[i, o]
            naive[b, o] = 1.0 / (1.0 + np.exp(-acc))
    assert np.allclose(out, naive, atol=1e-12, rtol=0)


def test_dense_forward_shape_error_names_widths():
    layer = glorot_layer(Rng(0, 0), 4, 2, "identity")
    with pytest.raises(ShapeError, match="3.*4|4.*3"):
        dense_forward(layer, np.zeros(3))


def test_dense_backward_zero_grad_gives_zero():
    layer = glorot_layer(Rng(1, 0), 3, 2, "relu")
    out, cache = dense_forward(layer, np.ones((4, 3)))
    dx, dw, db = dense_backward(layer, cache, np.zeros_like(out))
    assert not dx.any() and not dw.any() and not db.any()


def test_dense_backward_scalar_chain_rule():
    # 1x1 identity layer, loss = output -> dW = input.
    layer = DenseLayer(weight=np.array([[2.0]]), bias=np.zeros(1), activation="identity")
    out, cache = dense_forward(layer, np.array([[3.0]]))
    _, dw, db = dense_backward(layer, cache, np.ones_like(out))
    assert dw[0, 0] == 3.0
    assert db[0] == 1.0


@pytest.mark.parametrize("activation", ["identity", "relu", "sigmoid"])
def test_dense_backward_matches_finite_differences(activation):
    rng = Rng(5, 0)
    layer = glorot_layer(rng, 6, 4, activation)
    x = rng.normals(2 * 6, size=(2, 6))
    target = rng.normals(2 * 4, size=(2, 4))

    def loss_and_grads(params):
        layer.weight, layer.bias = params
        out, cache = dense_forward(layer, x)
        loss = float(((out - target) ** 2).sum())
        _, dw, db = dense_backward(layer, cache, 2.0 * (out - target))
        return loss, [dw, db]

    report = finite_difference_check(
        loss_and_grads, [layer.weight, layer.bias], tolerance=1e-6, names=["w", "b"]
    )
    assert report.passed, report.per_block


def test_dense_backward_stale_cache_rejected():
    layer_a = glorot_layer(Rng(0, 0), 3, 3, "relu")
    layer_b = glorot_layer(Rng(0, 1), 3, 3, "relu")
    out, cache = dense_forward(layer_a, np.ones(3))
    with pytest.raises(ContractError):
        dense_backward(layer_b, cache, np.zeros_like(out))


def test_adam_zero_gradient_leaves_params_unchanged():
    p = np.array([1.0, -2.0])
    state = AdamState(learning_rate=0.1)
    adam_step([p], [np.zeros(2)], state)
    assert np.array_equal(p, [1.0, -2.0])


def test_adam_first_step_moves_by_learning_rate():
    # Hand-evaluated recurrence at t=1, g=1: m_hat = 1, v_hat = 1, so the
    # update is lr / (1 + eps) ~ lr.
    p = np.array([0.5])
    state = AdamState(learning_rate=1e-4)
    adam_step([p], [np.ones(1)], state)
    assert p[0] == pytest.approx(0.5 - 1e-4, rel=1e-6)


def test_adam_constant_gradient_step_magnitude_approaches_lr():
    p = np.array([0.0])
    state = AdamState(learning_rate=1e-3)
    prev = p[0]
    for _ in range(200):
        adam_step([p], [np.full(1, 2.5)], state)
        step = prev - p[0]
        prev = p[0]
    assert step == pytest.approx(1e-3, rel=1e-3)


def test_adam_rejects_non_finite_gradient():
    p = np.array([0.0])
    with pytest.raises(TrainingDivergedError, match="enc.w"):
        adam_step([p], [np.array([np.nan])], AdamState(), names=["enc.w"])


def test_finite_difference_check_linear_function_near_zero_error():
    coeff = np.array([1.5, -2.0, 0.25])

    def model(params):
        (p,) = params
        return float(coeff @ p), [coeff.copy()]

    report = finite_difference_check(model, [np.array([0.3, 0.1, -0.7])], tolerance=1e-8)
    assert report.passed
    assert report.max_rel_error < 1e-9


def test_finite_difference_check_detects_corrupted_gradient():
    coeff = np.array([1.0, 2.0])

    def model(params):
        (p,) = params
        wrong = coeff.copy()
        wrong[1] *= 1.5
        return float(coeff @ p), [wrong]

    report = finite_difference_check(model, [np.array([0.0, 0.0])], tolerance=1e-4)
    assert not report.passed
    assert report.max_rel_error > 0.1
