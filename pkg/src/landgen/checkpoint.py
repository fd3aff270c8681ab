"""Self-describing JSON checkpoints: dims, scaler, and flat weight arrays.

Serialization is canonical (fixed key order, shortest-round-trip floats), so
save -> load -> save is byte-identical and checkpoints diff cleanly.
"""

from __future__ import annotations

import json

import numpy as np

from .cluvae import CluvaeModel, EmbeddingProjector, LatentConditionModel, ModelDims, TrainedBundle, VARIANTS
from .context_features import FeatureScaler
from .errors import DatasetFormatError
from .graph_embedding import VgaeModel
from .neural_core import DenseLayer

CHECKPOINT_FORMAT = "landgen-checkpoint"
CHECKPOINT_VERSION = 1


def _layer_record(name: str, layer: DenseLayer) -> dict:
    return {
        "name": name,
        "shape": [layer.in_width, layer.out_width],
        "activation": layer.activation,
        "weight": layer.weight.reshape(-1).tolist(),
        "bias": layer.bias.tolist(),
    }


def _layer_from_record(rec: dict) -> DenseLayer:
    shape = rec["shape"]
    weight = np.asarray(rec["weight"], dtype=np.float64)
    if weight.size != shape[0] * shape[1]:
        raise DatasetFormatError(
            f"layer {rec.get('name')!r}: weight length {weight.size} != shape product {shape}"
        )
    bias = np.asarray(rec["bias"], dtype=np.float64)
    if bias.size != shape[1]:
        raise DatasetFormatError(f"layer {rec.get('name')!r}: bias length {bias.size} != {shape[1]}")
    return DenseLayer(
        weight=weight.reshape(shape[0], shape[1]), bias=bias, activation=rec["activation"]
    )


def bundle_to_dict(bundle: TrainedBundle) -> dict:
    dims = bundle.dims
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "variant": bundle.variant,
        "dims": {
            "n": dims.n,
            "m": dims.m,
            "z": dims.z,
            "d": dims.d,
            "latent": dims.latent,
            "hidden": dims.hidden,
            "t": dims.t,
        },
        "lambda": bundle.lam,
        "scaler": {"mean": bundle.scaler.mean.tolist(), "std": bundle.scaler.std.tolist()},
        "s_projector": {
            "mean": bundle.s_scaler.mean.tolist(),
            "matrix": bundle.s_scaler.matrix.reshape(-1).tolist(),
        },
        "vgae": {
            "layers": [
                _layer_record("gcn_hidden", bundle.vgae.gcn_hidden),
                _layer_record("mu_head", bundle.vgae.mu_head),
                _layer_record("logvar_head", bundle.vgae.logvar_head),
            ]
        },
        "cvae": {"layers": [_layer_record(name, layer) for name, layer in bundle.cvae.layers()]},
        "latent_map": {
            "shape": list(bundle.latent_map.weight.shape),
            "weight": bundle.latent_map.weight.reshape(-1).tolist(),
            "bias": bundle.latent_map.bias.tolist(),
            "std": bundle.latent_map.std.tolist(),
        },
        "training": bundle.training,
    }


def bundle_from_dict(doc: dict) -> TrainedBundle:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise DatasetFormatError(f"unknown checkpoint format {doc.get('format')!r}")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise DatasetFormatError(f"unsupported checkpoint version {doc.get('version')!r}")
    variant = doc["variant"]
    if variant not in VARIANTS:
        raise DatasetFormatError(f"unknown variant {variant!r}")
    d = doc["dims"]
    dims = ModelDims(
        n=d["n"], m=d["m"], z=d["z"], d=d["d"], latent=d["latent"], hidden=d["hidden"], t=d["t"]
    )
    scaler = FeatureScaler(
        mean=np.asarray(doc["scaler"]["mean"], dtype=np.float64),
        std=np.asarray(doc["scaler"]["std"], dtype=np.float64),
    )
    proj_mean = np.asarray(doc["s_projector"]["mean"], dtype=np.float64)
    proj_matrix = np.asarray(doc["s_projector"]["matrix"], dtype=np.float64)
    if proj_matrix.size != proj_mean.size * proj_mean.size:
        raise DatasetFormatError("s_projector matrix length inconsistent with mean width")
    s_scaler = EmbeddingProjector(
        mean=proj_mean, matrix=proj_matrix.reshape(proj_mean.size, proj_mean.size)
    )
    vgae_layers = {rec["name"]: _layer_from_record(rec) for rec in doc["vgae"]["layers"]}
    vgae = VgaeModel(
        gcn_hidden=vgae_layers["gcn_hidden"],
        mu_head=vgae_layers["mu_head"],
        logvar_head=vgae_layers["logvar_head"],
    )
    cvae_layers = {rec["name"]: _layer_from_record(rec) for rec in doc["cvae"]["layers"]}
    required = {"enc_hidden", "enc_head", "dec_x_hidden", "dec_x_out"}
    missing = required - cvae_layers.keys()
    if missing:
        raise DatasetFormatError(f"checkpoint missing cvae layers {sorted(missing)}")
    cvae = CluvaeModel(
        variant=variant,
        dims=dims,
        lam=doc["lambda"],
        enc_hidden=cvae_layers["enc_hidden"],
        enc_head=cvae_layers["enc_head"],
        dec_x_hidden=cvae_layers["dec_x_hidden"],
        dec_x_out=cvae_layers["dec_x_out"],
        dec_f_hidden=cvae_layers.get("dec_f_hidden"),
        dec_f_out=cvae_layers.get("dec_f_out"),
    )
    lm = doc["latent_map"]
    lm_shape = lm["shape"]
    lm_weight = np.asarray(lm["weight"], dtype=np.float64)
    if lm_weight.size != lm_shape[0] * lm_shape[1]:
        raise DatasetFormatError(
            f"latent_map weight length {lm_weight.size} != shape product {lm_shape}"
        )
    latent_map = LatentConditionModel(
        weight=lm_weight.reshape(lm_shape[0], lm_shape[1]),
        bias=np.asarray(lm["bias"], dtype=np.float64),
        std=np.asarray(lm["std"], dtype=np.float64),
    )
    return TrainedBundle(
        variant=variant,
        dims=dims,
        lam=doc["lambda"],
        scaler=scaler,
        s_scaler=s_scaler,
        vgae=vgae,
        cvae=cvae,
        latent_map=latent_map,
        training=doc["training"],
    )


def save_checkpoint(bundle: TrainedBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bundle_to_dict(bundle), fh, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path) -> TrainedBundle:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"checkpoint is not valid JSON: {exc}") from exc
    try:
        return bundle_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise DatasetFormatError(f"checkpoint missing field: {exc}") from exc
