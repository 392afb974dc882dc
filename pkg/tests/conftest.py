"""Shared fixtures: small synthetic data, a partition and trained edge models."""
import numpy as np
import pytest

from src.data.dataset import SplitPair
from src.data.preprocessing import apply_normalization, fit_normalization, partition_edges, split_80_20
from src.data.synthetic import SynthConfig, generate_synthetic
from src.edge.trainer import train_edges
from src.nn.config import TrainConfig
from src.nn.network import autoencoder_shape

N_FEATURES = 6
EDGE_HIDDEN = [5, 4, 4, 5]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def synth_config():
    return SynthConfig(n_normal=400, n_attack=40, dim=N_FEATURES, latent_dim=3, seed=0)


@pytest.fixture
def dataset(synth_config):
    return generate_synthetic(synth_config)


@pytest.fixture
def fast_config():
    return TrainConfig(epochs=5, learning_rate=0.01, batch_size=32, seed=0)


@pytest.fixture
def partition(dataset):
    split = split_80_20(dataset, seed=0)
    record = fit_normalization(split.train.features)
    split = SplitPair(apply_normalization(split.train, record), apply_normalization(split.test, record))
    return partition_edges(split, m=2, s_train=100, s_test=20)


@pytest.fixture
def edge_shape():
    return autoencoder_shape(N_FEATURES, EDGE_HIDDEN)


@pytest.fixture
def trained_edges(partition, edge_shape, fast_config):
    return train_edges(partition, edge_shape, fast_config, train_normal_only=True)
