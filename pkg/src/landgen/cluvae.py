"""Conditional land-use VAE: encoder, reparameterized latent, dual-head
decoder, composite loss, trainer, and generator.

The encoder maps the flattened configuration plus the condition embedding
(context embedding concatenated with the guidance one-hot) through one relu
hidden layer to a joint head holding the latent mean and log-variance. The
decoder has two independent branches from (z, condition): a relu head that
reconstructs the configuration and a sigmoid head that predicts per-cell
functional zones. Loss = reconstruction MSE + Gaussian KL + lambda * zone
cross-entropy.

Variants rewire this base model:

* ``no_guidance``   zeroes the guidance block of the condition,
* ``no_context``    zeroes the context block,
* ``no_zone_head``  drops the zone branch and its loss term,
* ``no_variational``shrinks the encoder head to a deterministic bottleneck
  (z = mu, no KL).

The condition width stays fixed across variants so checkpoints remain
shape-compatible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .context_features import FeatureScaler
from .errors import ParameterError, ShapeError, TrainingDivergedError
from .graph_embedding import VgaeModel, embed_contexts, init_vgae, train_vgae
from .grid_data import LEVEL_COUNT, DatasetSample, LandUseConfiguration, dims_of
from .neural_core import AdamState, DenseLayer, adam_step, dense_backward, dense_forward, glorot_layer, sigmoid
from .rng import (
    STREAM_CVAE_INIT,
    STREAM_CVAE_TRAIN,
    STREAM_SPLIT,
    STREAM_VGAE_INIT,
    STREAM_VGAE_TRAIN,
    Rng,
)

VARIANTS = ("full", "no_guidance", "no_context", "no_zone_head", "no_variational")


@dataclass(frozen=True)
class GuidanceEmbedding:
    i: np.ndarray  # one-hot, length LEVEL_COUNT

    @classmethod
    def from_level(cls, level: int) -> "GuidanceEmbedding":
        if not 0 <= level < LEVEL_COUNT:
            raise ParameterError(f"green level must be in [0, {LEVEL_COUNT})")
        vec = np.zeros(LEVEL_COUNT)
        vec[level] = 1.0
        return cls(i=vec)


@dataclass(frozen=True)
class ConditionEmbedding:
    c: np.ndarray  # context block then guidance block; fixed width across variants


@dataclass(frozen=True)
class ModelDims:
    n: int
    m: int
    z: int
    d: int  # VGAE latent per node
    latent: int  # CVAE latent L
    hidden: int
    t: int

    @property
    def x_dim(self) -> int:
        return self.n * self.n * self.m

    @property
    def context_width(self) -> int:
        return 8 * self.d

    @property
    def cond_width(self) -> int:
        return self.context_width + LEVEL_COUNT

    @property
    def cells(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class LossBreakdown:
    l_x: float
    l_p: float
    l_f: float
    total: float

    @classmethod
    def compose(cls, l_x: float, l_p: float, l_f: float, lam: float) -> "LossBreakdown":
        return cls(l_x=l_x, l_p=l_p, l_f=l_f, total=l_x + l_p + lam * l_f)

    def as_dict(self) -> dict:
        return {"l_x": self.l_x, "l_p": self.l_p, "l_f": self.l_f, "total": self.total}


@dataclass
class CluvaeModel:
    variant: str
    dims: ModelDims
    lam: float
    enc_hidden: DenseLayer
    enc_head: DenseLayer
    dec_x_hidden: DenseLayer
    dec_x_out: DenseLayer
    dec_f_hidden: DenseLayer | None
    dec_f_out: DenseLayer | None

    def has_zone_head(self) -> bool:
        return self.variant != "no_zone_head"

    def is_variational(self) -> bool:
        return self.variant != "no_variational"

    def layers(self) -> list[tuple[str, DenseLayer]]:
        named = [
            ("enc_hidden", self.enc_hidden),
            ("enc_head", self.enc_head),
            ("dec_x_hidden", self.dec_x_hidden),
            ("dec_x_out", self.dec_x_out),
        ]
        if self.has_zone_head():
            named += [("dec_f_hidden", self.dec_f_hidden), ("dec_f_out", self.dec_f_out)]
        return named

    def params(self) -> list[np.ndarray]:
        out = []
        for _, layer in self.layers():
            out += [layer.weight, layer.bias]
        return out

    def param_names(self) -> list[str]:
        out = []
        for name, _ in self.layers():
            out += [f"{name}.w", f"{name}.b"]
        return out


def init_cluvae(rng: Rng, dims: ModelDims, lam: float, variant: str = "full") -> CluvaeModel:
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lambda must lie in [0, 1]")
    head_width = 2 * dims.latent if variant != "no_variational" else dims.latent
    dec_in = dims.latent + dims.cond_width
    zone_head = variant != "no_zone_head"
    return CluvaeModel(
        variant=variant,
        dims=dims,
        lam=lam,
        enc_hidden=glorot_layer(rng, dims.x_dim + dims.cond_width, dims.hidden, "relu"),
        enc_head=glorot_layer(rng, dims.hidden, head_width, "identity"),
        dec_x_hidden=glorot_layer(rng, dec_in, dims.hidden, "relu"),
        dec_x_out=glorot_layer(rng, dims.hidden, dims.x_dim, "relu"),
        dec_f_hidden=glorot_layer(rng, dec_in, dims.hidden, "relu") if zone_head else None,
        dec_f_out=glorot_layer(rng, dims.hidden, dims.cells * dims.z, "sigmoid") if zone_head else None,
    )


def make_condition(s, level, variant: str = "full", context_width: int | None = None) -> ConditionEmbedding:
    """Fixed-width condition vector with the variant's block masking applied."""
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    s_vec = np.asarray(getattr(s, "s", s), dtype=np.float64).reshape(-1)
    if context_width is not None and s_vec.size != context_width:
        raise ShapeError(f"context embedding width {s_vec.size}, expected {context_width}")
    level_idx = getattr(level, "level", level)
    guidance = GuidanceEmbedding.from_level(int(level_idx)).i
    context = np.zeros_like(s_vec) if variant == "no_context" else s_vec
    if variant == "no_guidance":
        guidance = np.zeros(LEVEL_COUNT)
    return ConditionEmbedding(c=np.concatenate([context, guidance]))


def encode(model: CluvaeModel, x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(mu, delta); delta = exp(0.5 * logvar), or zeros for the deterministic variant."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    h, _ = dense_forward(model.enc_hidden, np.hstack([x, c]))
    head, _ = dense_forward(model.enc_head, h)
    latent = model.dims.latent
    if not model.is_variational():
        return head, np.zeros_like(head)
    mu = head[:, :latent]
    delta = np.exp(0.5 * head[:, latent:])
    return mu, delta


def reparameterize(mu: np.ndarray, delta: np.ndarray, rng: Rng) -> np.ndarray:
    """z = mu + delta * eps with eps ~ N(0, I)."""
    mu = np.asarray(mu, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    if mu.shape != delta.shape:
        raise ShapeError(f"mu shape {mu.shape} != delta shape {delta.shape}")
    eps = rng.normals(mu.size, size=mu.shape)
    return mu + delta * eps


def decode(model: CluvaeModel, z: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """(x_recon >= 0, zone probabilities in (0,1) or None without the zone head)."""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    dec_in = np.hstack([z, c])
    hx, _ = dense_forward(model.dec_x_hidden, dec_in)
    x_recon, _ = dense_forward(model.dec_x_out, hx)
    if not model.has_zone_head():
        return x_recon, None
    hf, _ = dense_forward(model.dec_f_hidden, dec_in)
    f_probs, _ = dense_forward(model.dec_f_out, hf)
    return x_recon, f_probs


def loss_and_grads(
    model: CluvaeModel,
    x: np.ndarray,
    c: np.ndarray,
    zone_idx: np.ndarray,
    eps: np.ndarray,
) -> tuple[LossBreakdown, list[np.ndarray]]:
    """Batch loss breakdown and analytic gradients for every model parameter.

    ``eps`` (batch, latent) is supplied by the caller so the map from
    parameters to loss stays deterministic for gradient checking.
    """
    dims = model.dims
    batch = x.shape[0]
    latent = dims.latent

    enc_in = np.hstack([x, c])
    h_e, cache_eh = dense_forward(model.enc_hidden, enc_in)
    head, cache_et = dense_forward(model.enc_head, h_e)
    if model.is_variational():
        mu = head[:, :latent]
        logvar = head[:, latent:]
        delta = np.exp(0.5 * logvar)
        z = mu + delta * eps
        l_p = float(0.5 * np.sum(mu**2 + delta**2 - logvar - 1.0) / batch)
    else:
        mu = head
        logvar = None
        delta = None
        z = mu
        l_p = 0.0

    dec_in = np.hstack([z, c])
    h_x, cache_xh = dense_forward(model.dec_x_hidden, dec_in)
    x_recon, cache_xo = dense_forward(model.dec_x_out, h_x)
    residual = x_recon - x
    l_x = float(np.sum(residual**2) / batch)

    if model.has_zone_head():
        h_f, cache_fh = dense_forward(model.dec_f_hidden, dec_in)
        f_pre = h_f @ model.dec_f_out.weight + model.dec_f_out.bias
        rows = np.arange(batch)[:, None]
        true_cols = np.arange(dims.cells)[None, :] * dims.z + zone_idx
        pre_true = f_pre[rows, true_cols]
        l_f = float(np.sum(np.logaddexp(0.0, -pre_true)) / (batch * dims.cells))
    else:
        l_f = 0.0

    breakdown = LossBreakdown.compose(l_x, l_p, l_f, model.lam)

    # backward pass
    d_xr = 2.0 * residual / batch
    d_hx, g_xo_w, g_xo_b = dense_backward(model.dec_x_out, cache_xo, d_xr)
    d_dec_in_x, g_xh_w, g_xh_b = dense_backward(model.dec_x_hidden, cache_xh, d_hx)
    d_z = d_dec_in_x[:, :latent]

    zone_grads: list[np.ndarray] = []
    if model.has_zone_head():
        d_f_pre = np.zeros_like(f_pre)
        # d/da softplus(-a) = -(1 - sigmoid(a)), applied at the true-class entries
        d_f_pre[rows, true_cols] = -(1.0 - sigmoid(pre_true)) / (batch * dims.cells)
        d_f_pre *= model.lam
        g_fo_w = h_f.T @ d_f_pre
        g_fo_b = d_f_pre.sum(axis=0)
        d_hf = d_f_pre @ model.dec_f_out.weight.T
        d_dec_in_f, g_fh_w, g_fh_b = dense_backward(model.dec_f_hidden, cache_fh, d_hf)
        d_z = d_z + d_dec_in_f[:, :latent]
        zone_grads = [g_fh_w, g_fh_b, g_fo_w, g_fo_b]

    if model.is_variational():
        d_mu = d_z + mu / batch
        d_logvar = d_z * (0.5 * delta * eps) + (delta**2 - 1.0) / (2.0 * batch)
        d_head = np.hstack([d_mu, d_logvar])
    else:
        d_head = d_z
    d_he, g_et_w, g_et_b = dense_backward(model.enc_head, cache_et, d_head)
    _, g_eh_w, g_eh_b = dense_backward(model.enc_hidden, cache_eh, d_he)

    grads = [g_eh_w, g_eh_b, g_et_w, g_et_b, g_xh_w, g_xh_b, g_xo_w, g_xo_b] + zone_grads
    return breakdown, grads


def loss(model: CluvaeModel, x, c, zone_idx, rng: Rng) -> LossBreakdown:
    """Loss on a batch with one eps draw per sample."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    eps = rng.normals(x.shape[0] * model.dims.latent, size=(x.shape[0], model.dims.latent))
    breakdown, _ = loss_and_grads(model, x, np.atleast_2d(c), np.atleast_2d(zone_idx), eps)
    return breakdown


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 1e-4
    batch_size: int = 32
    lam: float = 0.55
    latent: int = 32
    hidden: int = 256
    vgae_latent: int = 32
    vgae_hidden: int = 128
    vgae_epochs: int = 200
    vgae_learning_rate: float = 1e-4

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ParameterError("epochs must be >= 0 and batch_size >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError("lambda must lie in [0, 1]")


@dataclass(frozen=True)
class EmbeddingProjector:
    """Affine map cleaning the context embedding before conditioning.

    The VGAE embedding has low effective rank (the ring aggregation mixes
    nodes heavily), so raw standardized dimensions are largely collinear
    noise. Fitting keeps the principal components whose eigenvalue passes the
    mean-eigenvalue rule, whitens them, and zero-pads back to the full width
    so the condition stays shape-compatible.
    """

    mean: np.ndarray  # (width,)
    matrix: np.ndarray  # (width, width); trailing columns zero

    def transform(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        if s.shape[-1] != self.mean.size:
            raise ShapeError(f"embedding width {s.shape[-1]}, expected {self.mean.size}")
        return (s - self.mean) @ self.matrix

    @classmethod
    def fit(cls, s_rows: np.ndarray) -> "EmbeddingProjector":
        s_rows = np.asarray(s_rows, dtype=np.float64)
        width = s_rows.shape[1]
        mean = s_rows.mean(axis=0)
        std = s_rows.std(axis=0)
        std = np.where(std > 0.0, std, 1.0)
        standardized = (s_rows - mean) / std
        cov = standardized.T @ standardized / max(s_rows.shape[0] - 1, 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals, eigvecs = eigvals[order], eigvecs[:, order]
        keep = int(np.sum(eigvals >= eigvals.mean()))
        keep = max(keep, 1)
        components = eigvecs[:, :keep]
        # sign convention: largest-|loading| entry of each component positive
        for j in range(keep):
            pivot = np.argmax(np.abs(components[:, j]))
            if components[pivot, j] < 0:
                components[:, j] = -components[:, j]
        whiten = components / np.sqrt(np.maximum(eigvals[:keep], 1e-12))
        matrix = np.zeros((width, width))
        matrix[:, :keep] = whiten / std[:, None]
        return cls(mean=mean, matrix=matrix)


@dataclass(frozen=True)
class LatentConditionModel:
    """Generation-time latent distribution z | c, fitted after training.

    Least-squares map from condition embeddings to the trained encoder's
    posterior means over the training split, with a per-dimension std that
    combines the regression residual and the mean posterior spread. Sampling
    from it keeps the decoder on the latent distribution it was trained on
    while inheriting the condition's structure.
    """

    weight: np.ndarray  # (cond_width, latent)
    bias: np.ndarray  # (latent,)
    std: np.ndarray  # (latent,)

    def sample(self, c_rows: np.ndarray, rng: Rng) -> np.ndarray:
        mean = c_rows @ self.weight + self.bias
        eps = rng.normals(mean.size, size=mean.shape)
        return mean + self.std * eps

    @classmethod
    def fit(
        cls, cond: np.ndarray, mu: np.ndarray, delta: np.ndarray, ridge: float = 1.0
    ) -> "LatentConditionModel":
        """Ridge regression of posterior means on conditions (bias unpenalized);
        the penalty keeps the many weak embedding columns from overfitting."""
        design = np.hstack([cond, np.ones((cond.shape[0], 1))])
        penalty = ridge * np.eye(design.shape[1])
        penalty[-1, -1] = 0.0
        gram = design.T @ design + penalty
        coef = np.linalg.solve(gram, design.T @ mu)
        residual = mu - design @ coef
        var = residual.var(axis=0) + (delta**2).mean(axis=0)
        return cls(weight=coef[:-1], bias=coef[-1], std=np.sqrt(var))


@dataclass
class TrainedBundle:
    """Everything needed to condition, generate, and evaluate."""

    variant: str
    dims: ModelDims
    lam: float
    scaler: FeatureScaler  # raw context features -> standardized GCN input
    s_scaler: EmbeddingProjector  # embedding -> whitened principal components
    vgae: VgaeModel
    cvae: CluvaeModel
    latent_map: LatentConditionModel
    training: dict  # seed, epochs, rates, initial/final loss

    def embed_features(self, raw_features: np.ndarray) -> np.ndarray:
        """Raw (8, width) context features -> standardized embedding row."""
        std = self.scaler.transform(np.asarray(raw_features, dtype=np.float64))
        s = embed_contexts(self.vgae, std[None, :, :])[0]
        return self.s_scaler.transform(s)

    def embed_feature_stack(self, raw_stack: np.ndarray) -> np.ndarray:
        std = self.scaler.transform(np.asarray(raw_stack, dtype=np.float64))
        return self.s_scaler.transform(embed_contexts(self.vgae, std))


def dataset_arrays(samples: list[DatasetSample]) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(features (K,8,F), x (K, n^2 m), zone_idx (K, n^2), levels (K,))."""
    feats = np.stack([s.context.features for s in samples])
    x = np.stack([s.configuration.grid.reshape(-1) for s in samples])
    zones = np.stack([s.zones.labels.reshape(-1) for s in samples])
    levels = np.array([s.green_level.level for s in samples], dtype=np.int64)
    return feats, x, zones, levels


def split_indices(count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """One seeded shuffle, then the leading 90% train / trailing 10% test."""
    perm = Rng(seed, STREAM_SPLIT).permutation(count)
    cut = (count * 9) // 10
    return perm[:cut], perm[cut:]


def conditions_for(bundle_variant: str, s_matrix: np.ndarray, levels: np.ndarray) -> np.ndarray:
    rows = [
        make_condition(s_matrix[i], int(levels[i]), bundle_variant).c
        for i in range(s_matrix.shape[0])
    ]
    return np.vstack(rows)


def train(
    dataset: list[DatasetSample],
    config: TrainConfig,
    seed: int,
    variant: str = "full",
    split_seed: int | None = None,
) -> tuple[TrainedBundle, list[LossBreakdown]]:
    """Full pipeline: split, scale, embed contexts, then fit the CVAE.

    The first loss-history entry is the pre-update loss over the training
    split; entry ``e`` is the mean over epoch ``e``'s minibatches.
    ``split_seed`` pins the train/test partition independently of the model
    seed (stability runs share one split while varying initialization).
    """
    if len(dataset) < 10:
        raise ParameterError("training needs at least 10 samples for a 90/10 split")
    n, m, z, t = dims_of(dataset)
    dims = ModelDims(
        n=n, m=m, z=z, d=config.vgae_latent, latent=config.latent, hidden=config.hidden, t=t
    )
    feats, x_all, zones_all, levels = dataset_arrays(dataset)
    split_seed = seed if split_seed is None else split_seed
    train_idx, _ = split_indices(len(dataset), split_seed)

    scaler = FeatureScaler.fit([feats[i] for i in train_idx])
    std_feats = scaler.transform(feats)
    vgae = init_vgae(
        Rng(seed, STREAM_VGAE_INIT), feats.shape[2], config.vgae_hidden, config.vgae_latent
    )
    train_vgae(
        vgae,
        std_feats[train_idx],
        config.vgae_epochs,
        Rng(seed, STREAM_VGAE_TRAIN),
        learning_rate=config.vgae_learning_rate,
    )
    raw_s = embed_contexts(vgae, std_feats)
    s_scaler = EmbeddingProjector.fit(raw_s[train_idx])
    s_matrix = s_scaler.transform(raw_s)
    cond = conditions_for(variant, s_matrix, levels)

    cvae = init_cluvae(Rng(seed, STREAM_CVAE_INIT), dims, config.lam, variant)
    train_rng = Rng(seed, STREAM_CVAE_TRAIN)
    params = cvae.params()
    names = cvae.param_names()
    state = AdamState(learning_rate=config.learning_rate)

    x_train = x_all[train_idx]
    c_train = cond[train_idx]
    zone_train = zones_all[train_idx]
    count = len(train_idx)

    def epoch_zero() -> LossBreakdown:
        eps = np.zeros((count, dims.latent))
        breakdown, _ = loss_and_grads(cvae, x_train, c_train, zone_train, eps)
        return breakdown

    history = [epoch_zero()]
    for _ in range(config.epochs):
        order = train_rng.permutation(count)
        sums = np.zeros(3)
        for start in range(0, count, config.batch_size):
            idx = order[start : start + config.batch_size]
            eps = train_rng.normals(idx.size * dims.latent, size=(idx.size, dims.latent))
            breakdown, grads = loss_and_grads(
                cvae, x_train[idx], c_train[idx], zone_train[idx], eps
            )
            if not np.isfinite(breakdown.total):
                raise TrainingDivergedError("cvae loss became non-finite")
            adam_step(params, grads, state, names=names)
            sums += np.array([breakdown.l_x, breakdown.l_p, breakdown.l_f]) * idx.size
        mean = sums / count
        history.append(LossBreakdown.compose(mean[0], mean[1], mean[2], config.lam))

    mu_train, delta_train = encode(cvae, x_train, c_train)
    latent_map = LatentConditionModel.fit(c_train, mu_train, delta_train)

    training_meta = {
        "seed": seed,
        "split_seed": split_seed,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "batch_size": config.batch_size,
        "vgae_epochs": config.vgae_epochs,
        "vgae_learning_rate": config.vgae_learning_rate,
        "initial_loss": history[0].as_dict(),
        "final_loss": history[-1].as_dict(),
    }
    bundle = TrainedBundle(
        variant=variant,
        dims=dims,
        lam=config.lam,
        scaler=scaler,
        s_scaler=s_scaler,
        vgae=vgae,
        cvae=cvae,
        latent_map=latent_map,
        training=training_meta,
    )
    return bundle, history


def generate(
    bundle: TrainedBundle, c: np.ndarray, rng: Rng, count: int = 1
) -> list[LandUseConfiguration]:
    """Sample z from the learned condition-dependent latent model and decode."""
    dims = bundle.dims
    c_rows = np.repeat(np.atleast_2d(np.asarray(c, dtype=np.float64)), count, axis=0)
    z = bundle.latent_map.sample(c_rows, rng)
    x_recon, _ = decode(bundle.cvae, z, c_rows)
    return [
        LandUseConfiguration(grid=x_recon[i].reshape(dims.n, dims.n, dims.m), n=dims.n, m=dims.m)
        for i in range(count)
    ]


