import math

import numpy as np
import pytest

from landgen.errors import ShapeError
from landgen.graph_embedding import (
    VgaeModel,
    embed_context,
    embed_contexts,
    gcn_forward,
    init_vgae,
    normalized_ring_adjacency,
    train_vgae,
    vgae_loss,
    vgae_loss_and_grads,
)
from landgen.neural_core import DenseLayer, finite_difference_check
from landgen.rng import Rng


def _zero_model(in_width=6, hidden=4, latent=3):
    return VgaeModel(
        gcn_hidden=DenseLayer(np.zeros((in_width, hidden)), np.zeros(hidden), "relu"),
        mu_head=DenseLayer(np.zeros((hidden, latent)), np.zeros(latent), "identity"),
        logvar_head=DenseLayer(np.zeros((hidden, latent)), np.zeros(latent), "identity"),
    )


def test_normalized_adjacency_all_nonzero_entries_one_third():
    a = normalized_ring_adjacency()
    nz = a[a != 0.0]
    assert np.allclose(nz, 1.0 / 3.0)
    assert np.array_equal(a, a.T)
    assert np.allclose(a.sum(axis=1), 1.0)


def test_zero_features_give_ring_symmetric_rows():
    model = init_vgae(Rng(1, 0), in_width=5, hidden=4, latent=3)
    mu, logvar = gcn_forward(model, np.zeros((8, 5)))
    assert np.allclose(mu, mu[0])
    assert np.allclose(logvar, logvar[0])


def test_gcn_forward_matches_naive_neighborhood_sums():
    rng = Rng(2, 0)
    model = init_vgae(rng, in_width=7, hidden=5, latent=4)
    x = rng.normals(8 * 7, size=(8, 7))
    mu, logvar = gcn_forward(model, x)

    # naive per-node recomputation: aggregate = (self + both neighbors)/3
    def agg(rows):
        out = np.zeros_like(rows)
        for i in range(8):
            out[i] = (rows[i] + rows[(i - 1) % 8] + rows[(i + 1) % 8]) / 3.0
        return out

    h = np.maximum(agg(x) @ model.gcn_hidden.weight + model.gcn_hidden.bias, 0.0)
    ah = agg(h)
    assert np.allclose(mu, ah @ model.mu_head.weight + model.mu_head.bias, atol=1e-12, rtol=0)
    assert np.allclose(
        logvar, ah @ model.logvar_head.weight + model.logvar_head.bias, atol=1e-12, rtol=0
    )


def test_vgae_loss_zero_model_is_ln2_bce_and_zero_kl():
    # Zero parameters: mu = logvar = 0, and with eps frozen at zero z = 0, so
    # every reconstruction probability is 0.5 (BCE = ln 2) and the KL is 0.
    model = _zero_model()
    eps = np.zeros((1, 8, 3))
    loss, _ = vgae_loss_and_grads(model, np.zeros((1, 8, 6)), eps)
    assert loss == pytest.approx(math.log(2.0), abs=1e-12)


def test_vgae_loss_matches_independent_pairwise_recomputation():
    rng = Rng(9, 0)
    model = init_vgae(rng, in_width=6, hidden=5, latent=3)
    x = rng.normals(8 * 6, size=(8, 6))
    eps = rng.normals(8 * 3, size=(1, 8, 3))
    loss, _ = vgae_loss_and_grads(model, x[None], eps)

    mu, logvar = gcn_forward(model, x)
    z = mu + np.exp(0.5 * logvar) * eps[0]
    ring = normalized_ring_adjacency()
    target = (ring > 0).astype(float)
    bce = 0.0
    for i in range(8):
        for j in range(8):
            p = 1.0 / (1.0 + math.exp(-float(z[i] @ z[j])))
            t = target[i, j]
            bce += -(t * math.log(p) + (1 - t) * math.log(1 - p))
    bce /= 64.0
    kl = 0.0
    for i in range(8):
        kl += 0.5 * float(np.sum(mu[i] ** 2 + np.exp(logvar[i]) - logvar[i] - 1.0))
    kl /= 8.0
    assert loss == pytest.approx(bce + kl, abs=1e-10)


def test_vgae_gradients_match_finite_differences():
    rng = Rng(4, 0)
    model = init_vgae(rng, in_width=5, hidden=4, latent=3)
    x = rng.normals(2 * 8 * 5, size=(2, 8, 5))
    eps = rng.normals(2 * 8 * 3, size=(2, 8, 3))

    def model_fn(params):
        (
            model.gcn_hidden.weight,
            model.gcn_hidden.bias,
            model.mu_head.weight,
            model.mu_head.bias,
            model.logvar_head.weight,
            model.logvar_head.bias,
        ) = params
        return vgae_loss_and_grads(model, x, eps)

    report = finite_difference_check(
        model_fn, model.params(), tolerance=1e-4, names=model.param_names()
    )
    assert report.passed, report.per_block


def test_train_vgae_zero_epochs_returns_initial_params():
    model = init_vgae(Rng(3, 0), in_width=4, hidden=3, latent=2)
    before = [p.copy() for p in model.params()]
    trained, history = train_vgae(model, np.zeros((5, 8, 4)), epochs=0, rng=Rng(3, 1))
    assert history == []
    assert all(np.array_equal(a, b) for a, b in zip(before, trained.params()))


def test_train_vgae_reduces_loss_on_toy_corpus():
    rng = Rng(12, 0)
    graphs = rng.normals(50 * 8 * 6, size=(50, 8, 6))
    model = init_vgae(Rng(12, 1), in_width=6, hidden=8, latent=4)
    eval_rng_loss = lambda m: float(
        np.mean([vgae_loss(m, g, Rng(99, i)) for i, g in enumerate(graphs)])
    )
    initial = eval_rng_loss(model)
    _, history = train_vgae(model, graphs, epochs=60, rng=Rng(12, 2))
    final = eval_rng_loss(model)
    assert final < initial
    assert history[-1] < history[0]


def test_train_vgae_deterministic():
    rng = Rng(5, 0)
    graphs = rng.normals(20 * 8 * 4, size=(20, 8, 4))
    m1 = init_vgae(Rng(5, 1), 4, 6, 3)
    m2 = init_vgae(Rng(5, 1), 4, 6, 3)
    train_vgae(m1, graphs, epochs=10, rng=Rng(5, 2))
    train_vgae(m2, graphs, epochs=10, rng=Rng(5, 2))
    assert all(np.array_equal(a, b) for a, b in zip(m1.params(), m2.params()))


def test_embed_context_width_and_determinism():
    model = init_vgae(Rng(6, 0), in_width=5, hidden=4, latent=8)
    x = Rng(6, 1).normals(8 * 5, size=(8, 5))
    emb = embed_context(model, x)
    assert emb.s.shape == (64,)
    assert np.array_equal(emb.s, embed_context(model, x).s)


def test_embed_context_ring_rotation_equivariance():
    model = init_vgae(Rng(7, 0), in_width=5, hidden=6, latent=3)
    x = Rng(7, 1).normals(8 * 5, size=(8, 5))
    base = embed_context(model, x).s.reshape(8, 3)
    for shift in (1, 3, 5):
        rotated = embed_context(model, np.roll(x, shift, axis=0)).s.reshape(8, 3)
        assert np.allclose(np.roll(base, shift, axis=0), rotated, atol=1e-12, rtol=0)


def test_embed_contexts_matches_single_graph_path():
    model = init_vgae(Rng(8, 0), in_width=4, hidden=5, latent=2)
    graphs = Rng(8, 1).normals(6 * 8 * 4, size=(6, 8, 4))
    batch = embed_contexts(model, graphs)
    for i in range(6):
        assert np.allclose(batch[i], embed_context(model, graphs[i]).s, atol=0, rtol=0)


def test_gcn_forward_width_mismatch():
    model = init_vgae(Rng(0, 0), in_width=4, hidden=3, latent=2)
    with pytest.raises(ShapeError):
        gcn_forward(model, np.zeros((8, 5)))
