"""Minimal dense-network engine: layers, analytic backprop, Adam, and
finite-difference gradient verification. Everything is float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ShapeError, TrainingDivergedError
from .rng import Rng

ACTIVATIONS = ("identity", "relu", "sigmoid")


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class DenseLayer:
    weight: np.ndarray  # (in, out)
    bias: np.ndarray  # (out,)
    activation: str = "identity"

    def __post_init__(self):
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ShapeError(
                f"weight {self.weight.shape} and bias {self.bias.shape} are inconsistent"
            )
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation {self.activation!r}")

    @property
    def in_width(self) -> int:
        return self.weight.shape[0]

    @property
    def out_width(self) -> int:
        return self.weight.shape[1]


def glorot_layer(rng: Rng, in_width: int, out_width: int, activation: str) -> DenseLayer:
    """Uniform +/- sqrt(6/(in+out)) weights, zero bias."""
    bound = np.sqrt(6.0 / (in_width + out_width))
    flat = rng.uniform_block(in_width * out_width)
    weight = (2.0 * bound * flat - bound).reshape(in_width, out_width)
    return DenseLayer(weight=weight, bias=np.zeros(out_width), activation=activation)


@dataclass
class DenseCache:
    layer: DenseLayer
    inputs: np.ndarray  # (batch, in)
    pre_activation: np.ndarray  # (batch, out)


def dense_forward(layer: DenseLayer, inputs: np.ndarray) -> tuple[np.ndarray, DenseCache]:
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if inputs.shape[1] != layer.in_width:
        raise ShapeError(f"input width {inputs.shape[1]} does not match layer width {layer.in_width}")
    pre = inputs @ layer.weight + layer.bias
    if layer.activation == "relu":
        out = relu(pre)
    elif layer.activation == "sigmoid":
        out = sigmoid(pre)
    else:
        out = pre
    return out, DenseCache(layer=layer, inputs=inputs, pre_activation=pre)


def dense_backward(
    layer: DenseLayer, cache: DenseCache, output_grad: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(input_grad, weight_grad, bias_grad) for the cached forward pass."""
    if cache.layer is not layer:
        raise ContractError("backprop cache does not belong to this layer")
    output_grad = np.atleast_2d(np.asarray(output_grad, dtype=np.float64))
    if output_grad.shape != cache.pre_activation.shape:
        raise ContractError(
            f"output grad shape {output_grad.shape} does not match cached "
            f"activation shape {cache.pre_activation.shape}"
        )
    if layer.activation == "relu":
        d_pre = output_grad * (cache.pre_activation > 0.0)
    elif layer.activation == "sigmoid":
        s = sigmoid(cache.pre_activation)
        d_pre = output_grad * s * (1.0 - s)
    else:
        d_pre = output_grad
    weight_grad = cache.inputs.T @ d_pre
    bias_grad = d_pre.sum(axis=0)
    input_grad = d_pre @ layer.weight.T
    return input_grad, weight_grad, bias_grad


@dataclass
class AdamState:
    """Bias-corrected Adam over a named list of parameter arrays."""

    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    def initialize(self, params: list[np.ndarray]) -> None:
        self.first_moment = [np.zeros_like(p) for p in params]
        self.second_moment = [np.zeros_like(p) for p in params]
        self.step_count = 0


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    names: list[str] | None = None,
) -> AdamState:
    """In-place Adam update; raises on non-finite gradients."""
    if not state.first_moment:
        state.initialize(params)
    state.step_count += 1
    t = state.step_count
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t
    for i, (p, g) in enumerate(zip(params, grads)):
        if not np.all(np.isfinite(g)):
            block = names[i] if names else f"param[{i}]"
            raise TrainingDivergedError("non-finite gradient", block=block)
        m = state.first_moment[i]
        v = state.second_moment[i]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return state


@dataclass
class GradientCheckReport:
    max_rel_error: float
    tolerance: float
    passed: bool
    per_block: dict[str, float]
    worst_block: str


# Components whose analytic and numeric gradients are both below this floor
# are compared against the floor itself; keeps finite-difference cancellation
# noise on exactly-zero gradients from registering as relative error.
REL_ERROR_FLOOR = 1e-3


def finite_difference_check(
    model_fn,
    params: list[np.ndarray],
    tolerance: float,
    h: float = 1e-5,
    names: list[str] | None = None,
) -> GradientCheckReport:
    """Compare ``model_fn``'s analytic gradients to central differences.

    ``model_fn(params) -> (loss, grads)`` must be deterministic in ``params``
    (freeze any noise source before calling). Relative error per component is
    ``|a - n| / max(|a|, |n|, REL_ERROR_FLOOR)``.
    """
    names = names or [f"param[{i}]" for i in range(len(params))]
    _, analytic = model_fn(params)
    per_block: dict[str, float] = {}
    for i, p in enumerate(params):
        numeric = np.zeros_like(p)
        flat = p.reshape(-1)
        num_flat = numeric.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            loss_plus, _ = model_fn(params)
            flat[j] = orig - h
            loss_minus, _ = model_fn(params)
            flat[j] = orig
            num_flat[j] = (loss_plus - loss_minus) / (2.0 * h)
        a = analytic[i]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), REL_ERROR_FLOOR)
        per_block[names[i]] = float(np.max(np.abs(a - numeric) / denom)) if a.size else 0.0
    worst_block = max(per_block, key=per_block.get)
    max_rel = per_block[worst_block]
    return GradientCheckReport(
        max_rel_error=max_rel,
        tolerance=tolerance,
        passed=max_rel < tolerance,
        per_block=per_block,
        worst_block=worst_block,
    )
