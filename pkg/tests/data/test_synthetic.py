import numpy as np
import pytest

from src.data.synthetic import SynthConfig, apply_edge_jitter, generate_synthetic, load_manifest, save_dataset
from src.data.cleaner import FlowSchema, ingest_csv
from src.utils.errors import ConfigurationError


def test_counts_and_labels():
    ds = generate_synthetic(SynthConfig(n_normal=100, n_attack=20, dim=4, seed=1))
    assert ds.n_rows == 120
    assert int(ds.labels.sum()) == 20
    assert ds.manifest['config']['n_attack'] == 20


def test_generation_is_seeded():
    cfg = SynthConfig(n_normal=50, n_attack=5, dim=3, seed=2)
    assert generate_synthetic(cfg).content_hash() == generate_synthetic(cfg).content_hash()
    other = SynthConfig(n_normal=50, n_attack=5, dim=3, seed=3)
    assert generate_synthetic(cfg).content_hash() != generate_synthetic(other).content_hash()


def test_latent_factor_keeps_unit_marginals():
    ds = generate_synthetic(SynthConfig(n_normal=20000, n_attack=0, dim=5, latent_dim=2, noise=0.2, seed=0))
    np.testing.assert_allclose(ds.features.std(axis=0), 1.0, atol=0.05)
    corr = np.corrcoef(ds.features, rowvar=False)
    assert np.abs(corr[np.triu_indices(5, 1)]).max() > 0.2


def test_attack_rows_are_shifted():
    ds = generate_synthetic(SynthConfig(n_normal=2000, n_attack=2000, dim=3, attack_shift=3.0, seed=0))
    gap = ds.features[ds.labels == 1].mean(axis=0) - ds.features[ds.labels == 0].mean(axis=0)
    np.testing.assert_allclose(gap, 3.0, atol=0.15)


@pytest.mark.parametrize('changes', [{'n_normal': 0}, {'latent_dim': 30}, {'noise': 1.5}, {'normal_std': 0.0}])
def test_invalid_configs(changes):
    with pytest.raises(ConfigurationError):
        SynthConfig(**{**{'dim': 4}, **changes}).validate()


def test_from_dict_ignores_unknown_keys():
    cfg = SynthConfig.from_dict({'n_normal': 10, 'comment': 'x'}, seed=5, dim=None)
    assert (cfg.n_normal, cfg.seed, cfg.dim) == (10, 5, 20)


def test_saved_dataset_reads_back(tmp_path):
    ds = generate_synthetic(SynthConfig(n_normal=30, n_attack=3, dim=3, seed=0))
    path = save_dataset(ds, tmp_path / 'flows.csv')
    assert load_manifest(path)['config']['seed'] == 0

    loaded = ingest_csv(str(path), FlowSchema.from_header(str(path)))
    np.testing.assert_array_equal(loaded.features, ds.features)
    np.testing.assert_array_equal(loaded.labels, ds.labels)


def test_edge_jitter_shifts_each_edge_consistently(partition):
    jittered = apply_edge_jitter(partition, jitter=0.5, seed=0)
    for before, after in zip(partition.edges, jittered.edges):
        train_shift = after.train.features - before.train.features
        test_shift = after.test.features - before.test.features
        np.testing.assert_allclose(train_shift, train_shift[0])
        np.testing.assert_allclose(test_shift[0], train_shift[0])
    assert jittered.central is partition.central
    assert apply_edge_jitter(partition, 0.0, seed=0) is partition
