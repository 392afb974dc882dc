import numpy as np
import pytest

from src.data.dataset import Dataset, SplitPair
from src.data.preprocessing import fit_normalization, normalize, partition_edges, split_80_20
from src.utils.errors import ConfigurationError, EmptyDatasetError, NonFiniteDataError, PartitionError, SLSError


def _ds(n: int, d: int = 2) -> Dataset:
    return Dataset(features=np.arange(n * d, dtype=float).reshape(n, d), labels=np.zeros(n, dtype=int))


def test_minmax_maps_onto_unit_interval():
    ds = Dataset(features=np.array([[0.0], [5.0], [10.0]]))
    out, record = normalize(ds, 'minmax')
    np.testing.assert_allclose(out.features[:, 0], [0.0, 0.5, 1.0])
    assert out.normalization is record


def test_zscore_moments(rng):
    ds = Dataset(features=rng.normal(3.0, 2.0, size=(500, 3)))
    out, _ = normalize(ds, 'zscore')
    np.testing.assert_allclose(out.features.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.features.std(axis=0), 1.0, atol=1e-12)


def test_constant_feature_maps_to_zero():
    ds = Dataset(features=np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]]))
    out, record = normalize(ds)
    assert record.constant.tolist() == [False, True]
    assert np.all(out.features[:, 1] == 0.0)


def test_record_reused_on_unseen_rows():
    record = fit_normalization(np.array([[0.0], [10.0]]))
    np.testing.assert_allclose(record.apply(np.array([[20.0], [-5.0]])), [[2.0], [-0.5]])


def test_normalization_needs_two_rows():
    with pytest.raises(EmptyDatasetError):
        fit_normalization(np.ones((1, 3)))


def test_unknown_normalization():
    with pytest.raises(ConfigurationError):
        fit_normalization(np.ones((3, 3)), 'robust')


@pytest.mark.parametrize('n, n_train, n_test', [(100, 80, 20), (101, 81, 20), (5, 4, 1)])
def test_split_sizes(n, n_train, n_test):
    split = split_80_20(_ds(n), seed=3)
    assert (split.train.n_rows, split.test.n_rows) == (n_train, n_test)
    assert not set(split.train.row_ids) & set(split.test.row_ids)


def test_split_is_seeded():
    a, b = split_80_20(_ds(50), seed=9), split_80_20(_ds(50), seed=9)
    np.testing.assert_array_equal(a.train.row_ids, b.train.row_ids)
    assert not np.array_equal(a.train.row_ids, split_80_20(_ds(50), seed=10).train.row_ids)


def test_split_rejects_tiny_datasets():
    with pytest.raises(EmptyDatasetError):
        split_80_20(_ds(4), seed=0)


def test_partition_consecutive_blocks():
    split = SplitPair(train=_ds(100), test=_ds(30))
    part = partition_edges(split, m=2, s_train=40, s_test=10)
    np.testing.assert_array_equal(part.edge(1).train.row_ids, np.arange(0, 40))
    np.testing.assert_array_equal(part.edge(2).train.row_ids, np.arange(40, 80))
    np.testing.assert_array_equal(part.edge(2).test.row_ids, np.arange(10, 20))
    assert part.central.train.n_rows == 20
    assert part.central.test.n_rows == 10


def test_partition_without_leftover_has_no_central_block():
    part = partition_edges(SplitPair(train=_ds(80), test=_ds(20)), m=2, s_train=40, s_test=10)
    assert part.central is None
    assert len(part.edge_row_ids()) == 100


def test_partition_too_large():
    with pytest.raises(PartitionError, match='need 120 rows'):
        partition_edges(SplitPair(train=_ds(100), test=_ds(30)), m=3, s_train=40, s_test=10)


def test_partition_rejects_zero_edges():
    with pytest.raises(ConfigurationError):
        partition_edges(SplitPair(train=_ds(10), test=_ds(5)), m=0, s_train=1, s_test=1)


def test_fixture_partition_is_disjoint(partition):
    edge_ids = partition.edge_row_ids()
    assert len(set(edge_ids)) == len(edge_ids)
    central_ids = np.concatenate([partition.central.train.row_ids, partition.central.test.row_ids])
    assert not set(edge_ids) & set(central_ids)
    assert list(partition.summary()['block']) == ['edge1', 'edge2', 'central']


@pytest.mark.parametrize('bad', [np.nan, np.inf, -np.inf])
def test_non_finite_features_are_rejected(bad):
    features = np.ones((3, 2))
    features[1, 0] = bad
    with pytest.raises(NonFiniteDataError) as info:
        Dataset(features=features)
    assert isinstance(info.value, SLSError)
