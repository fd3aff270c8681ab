"""Variational graph autoencoder over the fixed 8-vertex ring.

Encoder: one aggregated dense layer with relu, then aggregated mu / log-var
heads; decoder: inner-product adjacency reconstruction. Aggregation uses the
symmetric normalization (A + I) / 3, which is exact on the ring because every
vertex has degree 3 after self-loops. Downstream embeddings use node means
only, so the context embedding is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .context_features import RING_SIZE, ring_adjacency
from .errors import ParameterError, ShapeError, TrainingDivergedError
from .neural_core import AdamState, DenseLayer, adam_step, glorot_layer, relu, sigmoid
from .rng import Rng


def normalized_ring_adjacency() -> np.ndarray:
    return (ring_adjacency() + np.eye(RING_SIZE)) / 3.0


_SELF_LOOP_TARGET = ring_adjacency() + np.eye(RING_SIZE)


@dataclass
class VgaeModel:
    gcn_hidden: DenseLayer  # in -> h1, relu after aggregation
    mu_head: DenseLayer  # h1 -> d, aggregation + identity
    logvar_head: DenseLayer  # h1 -> d, aggregation + identity

    @property
    def latent_dim(self) -> int:
        return self.mu_head.out_width

    @property
    def in_width(self) -> int:
        return self.gcn_hidden.in_width

    def params(self) -> list[np.ndarray]:
        return [
            self.gcn_hidden.weight,
            self.gcn_hidden.bias,
            self.mu_head.weight,
            self.mu_head.bias,
            self.logvar_head.weight,
            self.logvar_head.bias,
        ]

    def param_names(self) -> list[str]:
        return ["gcn1.w", "gcn1.b", "mu.w", "mu.b", "logvar.w", "logvar.b"]


@dataclass(frozen=True)
class ContextEmbedding:
    s: np.ndarray  # length 8 * d, node means in directional order


def init_vgae(rng: Rng, in_width: int, hidden: int = 32, latent: int = 8) -> VgaeModel:
    return VgaeModel(
        gcn_hidden=glorot_layer(rng, in_width, hidden, "relu"),
        mu_head=glorot_layer(rng, hidden, latent, "identity"),
        logvar_head=glorot_layer(rng, hidden, latent, "identity"),
    )


def _forward_batch(model: VgaeModel, features: np.ndarray):
    """features: (batch, 8, in_width) standardized. Returns intermediate tensors."""
    if features.shape[-2] != RING_SIZE or features.shape[-1] != model.in_width:
        raise ShapeError(
            f"features shape {features.shape} incompatible with ring size {RING_SIZE} "
            f"and input width {model.in_width}"
        )
    a_norm = normalized_ring_adjacency()
    ax = np.matmul(a_norm, features)
    h_pre = ax @ model.gcn_hidden.weight + model.gcn_hidden.bias
    h = relu(h_pre)
    ah = np.matmul(a_norm, h)
    mu = ah @ model.mu_head.weight + model.mu_head.bias
    logvar = ah @ model.logvar_head.weight + model.logvar_head.bias
    return ax, h_pre, h, ah, mu, logvar


def gcn_forward(model: VgaeModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-node (mu, logvar), each (8, d), for one standardized feature matrix."""
    *_, mu, logvar = _forward_batch(model, features[None, :, :])
    return mu[0], logvar[0]


def _loss_terms(mu, logvar, eps):
    """Per-graph reconstruction BCE and node-mean KL; all inputs (batch, 8, d)."""
    delta = np.exp(0.5 * logvar)
    z = mu + delta * eps
    logits = z @ z.transpose(0, 2, 1)
    # stable BCE from logits against the self-loop ring target
    target = _SELF_LOOP_TARGET
    bce_terms = np.maximum(logits, 0.0) - logits * target + np.log1p(np.exp(-np.abs(logits)))
    bce = bce_terms.mean(axis=(1, 2))
    kl_nodes = 0.5 * (mu**2 + delta**2 - logvar - 1.0).sum(axis=2)
    kl = kl_nodes.mean(axis=1)
    return z, logits, delta, bce, kl


def vgae_loss(model: VgaeModel, features: np.ndarray, rng: Rng) -> float:
    """Reconstruction BCE over all 64 vertex pairs plus mean node KL."""
    eps = rng.normals(RING_SIZE * model.latent_dim, size=(1, RING_SIZE, model.latent_dim))
    *_, mu, logvar = _forward_batch(model, features[None, :, :])
    _, _, _, bce, kl = _loss_terms(mu, logvar, eps)
    return float(bce[0] + kl[0])


def vgae_loss_and_grads(
    model: VgaeModel, features: np.ndarray, eps: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Batch-mean loss and analytic gradients; eps is frozen by the caller."""
    batch = features.shape[0]
    ax, h_pre, h, ah, mu, logvar = _forward_batch(model, features)
    z, logits, delta, bce, kl = _loss_terms(mu, logvar, eps)
    loss = float(np.mean(bce + kl))

    pair_count = RING_SIZE * RING_SIZE
    d_logits = (sigmoid(logits) - _SELF_LOOP_TARGET) / (pair_count * batch)
    d_z = np.matmul(d_logits + d_logits.transpose(0, 2, 1), z)
    d_mu = d_z + mu / (RING_SIZE * batch)
    d_logvar = d_z * (0.5 * delta * eps) + (delta**2 - 1.0) / (2.0 * RING_SIZE * batch)

    a_norm = normalized_ring_adjacency()
    d_ah = d_mu @ model.mu_head.weight.T + d_logvar @ model.logvar_head.weight.T
    grad_mu_w = np.einsum("bif,bid->fd", ah, d_mu)
    grad_mu_b = d_mu.sum(axis=(0, 1))
    grad_lv_w = np.einsum("bif,bid->fd", ah, d_logvar)
    grad_lv_b = d_logvar.sum(axis=(0, 1))
    d_h = np.matmul(a_norm, d_ah)
    d_h_pre = d_h * (h_pre > 0.0)
    grad_w1 = np.einsum("bif,bih->fh", ax, d_h_pre)
    grad_b1 = d_h_pre.sum(axis=(0, 1))
    return loss, [grad_w1, grad_b1, grad_mu_w, grad_mu_b, grad_lv_w, grad_lv_b]


def train_vgae(
    model: VgaeModel,
    graphs: np.ndarray,
    epochs: int,
    rng: Rng,
    learning_rate: float = 0.01,
    batch_size: int = 32,
) -> tuple[VgaeModel, list[float]]:
    """Shared-weight Adam training over all graphs; returns per-epoch mean loss."""
    graphs = np.asarray(graphs, dtype=np.float64)
    if graphs.ndim != 3 or graphs.shape[0] == 0:
        raise ParameterError("training requires a non-empty (count, 8, width) feature stack")
    count = graphs.shape[0]
    d = model.latent_dim
    state = AdamState(learning_rate=learning_rate)
    params = model.params()
    names = model.param_names()
    history: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(count)
        epoch_loss = 0.0
        for start in range(0, count, batch_size):
            idx = order[start : start + batch_size]
            eps = rng.normals(idx.size * RING_SIZE * d, size=(idx.size, RING_SIZE, d))
            loss, grads = vgae_loss_and_grads(model, graphs[idx], eps)
            if not np.isfinite(loss):
                raise TrainingDivergedError("vgae loss became non-finite")
            adam_step(params, grads, state, names=names)
            epoch_loss += loss * idx.size
        history.append(epoch_loss / count)
    return model, history


def embed_context(model: VgaeModel, features: np.ndarray) -> ContextEmbedding:
    """Deterministic embedding: node means concatenated in directional order."""
    mu, _ = gcn_forward(model, features)
    return ContextEmbedding(s=mu.reshape(-1))


def embed_contexts(model: VgaeModel, graphs: np.ndarray) -> np.ndarray:
    """(count, 8*d) matrix of embeddings for a standardized feature stack."""
    *_, mu, _ = _forward_batch(model, graphs)
    return mu.reshape(graphs.shape[0], -1)
