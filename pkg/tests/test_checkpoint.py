import json

import numpy as np
import pytest

from landgen.checkpoint import bundle_to_dict, load_checkpoint, save_checkpoint
from landgen.cluvae import generate, make_condition
from landgen.errors import DatasetFormatError
from landgen.rng import Rng


def test_checkpoint_round_trip_byte_identical(tmp_path, tiny_bundle):
    bundle, _ = tiny_bundle
    first = tmp_path / "model.json"
    second = tmp_path / "model2.json"
    save_checkpoint(bundle, first)
    save_checkpoint(load_checkpoint(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_checkpoint_preserves_generation_behavior(tmp_path, tiny_bundle):
    bundle, _ = tiny_bundle
    path = tmp_path / "model.json"
    save_checkpoint(bundle, path)
    loaded = load_checkpoint(path)
    c = make_condition(np.zeros(bundle.dims.context_width), 1, bundle.variant).c
    a = generate(bundle, c, Rng(5, 0), count=2)
    b = generate(loaded, c, Rng(5, 0), count=2)
    for x, y in zip(a, b):
        assert np.array_equal(x.grid, y.grid)
    assert loaded.variant == bundle.variant
    assert loaded.training == bundle.training


def test_checkpoint_rejects_unknown_format(tmp_path, tiny_bundle):
    bundle, _ = tiny_bundle
    doc = bundle_to_dict(bundle)
    doc["format"] = "something-else"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(DatasetFormatError, match="format"):
        load_checkpoint(path)


def test_checkpoint_rejects_version_mismatch(tmp_path, tiny_bundle):
    bundle, _ = tiny_bundle
    doc = bundle_to_dict(bundle)
    doc["version"] = 99
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(DatasetFormatError, match="version"):
        load_checkpoint(path)


def test_checkpoint_rejects_shape_mismatch(tmp_path, tiny_bundle):
    bundle, _ = tiny_bundle
    doc = bundle_to_dict(bundle)
    doc["cvae"]["layers"][0]["weight"] = doc["cvae"]["layers"][0]["weight"][:-3]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(DatasetFormatError, match="length"):
        load_checkpoint(path)


def test_checkpoint_rejects_non_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(DatasetFormatError, match="JSON"):
        load_checkpoint(path)
