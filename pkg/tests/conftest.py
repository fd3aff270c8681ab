import pytest

from landgen.cluvae import TrainConfig, train
from landgen.grid_data import SynthesisParams, synthesize_city

TINY_PARAMS = SynthesisParams(n=4, m=5, z_count=2, k_samples=80, seed=101)
TINY_CONFIG = TrainConfig(
    epochs=4,
    latent=6,
    hidden=24,
    vgae_epochs=15,
    vgae_hidden=8,
    vgae_latent=2,
)


@pytest.fixture(scope="session")
def tiny_dataset():
    return synthesize_city(TINY_PARAMS)


@pytest.fixture(scope="session")
def tiny_bundle(tiny_dataset):
    bundle, history = train(tiny_dataset, TINY_CONFIG, seed=17)
    return bundle, history
