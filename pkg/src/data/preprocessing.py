"""
Normalization, the 80:20 split and per-edge partitioning.
"""
import logging
from typing import Tuple

import numpy as np

from src.data.dataset import Dataset, EdgePartition, NormalizationRecord, SplitPair
from src.utils.errors import ConfigurationError, EmptyDatasetError, PartitionError

logger = logging.getLogger(__name__)

NORMALIZATION_METHODS = ('minmax', 'zscore')
TEST_FRACTION = 0.2
MIN_SPLIT_ROWS = 5


def fit_normalization(features: np.ndarray, method: str = 'minmax') -> NormalizationRecord:
    """
    Compute a reusable per-feature transform.

    Args:
        features: Matrix with at least 2 rows
        method: ``minmax`` or ``zscore``

    Returns:
        NormalizationRecord
    """
    x = np.asarray(features, dtype=np.float64)
    if x.shape[0] < 2:
        raise EmptyDatasetError(f"Normalization needs at least 2 rows, got {x.shape[0]}")
    if method == 'minmax':
        offset = x.min(axis=0)
        scale = x.max(axis=0) - offset
    elif method == 'zscore':
        offset = x.mean(axis=0)
        scale = x.std(axis=0)
    else:
        raise ConfigurationError(f"Unknown normalization {method!r}; use one of {NORMALIZATION_METHODS}")
    constant = scale == 0
    if constant.any():
        logger.warning(f"{int(constant.sum())} constant feature(s) will map to 0")
    return NormalizationRecord(method, offset, scale, constant)


def normalize(ds: Dataset, method: str = 'minmax') -> Tuple[Dataset, NormalizationRecord]:
    """
    Normalize every feature of ``ds``.

    minmax maps each feature onto [0, 1], zscore to mean 0 / std 1; constant
    features become 0 and are flagged in the record.

    Args:
        ds: Dataset with at least 2 rows
        method: ``minmax`` or ``zscore``

    Returns:
        (normalized dataset, record reusable on unseen rows)
    """
    record = fit_normalization(ds.features, method)
    return ds.with_features(record.apply(ds.features), normalization=record), record


def apply_normalization(ds: Dataset, record: NormalizationRecord) -> Dataset:
    """Transform held-out rows with a record fitted elsewhere."""
    return ds.with_features(record.apply(ds.features), normalization=record)


def split_80_20(ds: Dataset, seed: int) -> SplitPair:
    """
    Shuffle rows with ``seed`` and split them 80:20.

    The test share is floor(0.2 * n), so 101 rows give 81 / 20.

    Args:
        ds: Dataset with at least 5 rows
        seed: Shuffle seed

    Returns:
        SplitPair of row-disjoint train and test sets
    """
    n = ds.n_rows
    if n < MIN_SPLIT_ROWS:
        raise EmptyDatasetError(f"Splitting needs at least {MIN_SPLIT_ROWS} rows, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_test = int(np.floor(n * TEST_FRACTION))
    n_train = n - n_test
    return SplitPair(train=ds.subset(order[:n_train]), test=ds.subset(order[n_train:]))


def partition_edges(split: SplitPair, m: int, s_train: int, s_test: int) -> EdgePartition:
    """
    Carve ``m`` consecutive, non-overlapping blocks for the edges.

    Edge k (1-indexed) receives train rows (k-1)*s_train+1 .. k*s_train and
    test rows (k-1)*s_test+1 .. k*s_test of the split. Rows left over form
    the central-cloud block.

    Args:
        split: Output of split_80_20
        m: Number of edges
        s_train: Train rows per edge
        s_test: Test rows per edge

    Returns:
        EdgePartition
    """
    if m < 1 or s_train < 1 or s_test < 1:
        raise ConfigurationError(f"m, s_train and s_test must be positive (got {m}, {s_train}, {s_test})")
    need_train, need_test = m * s_train, m * s_test
    if need_train > split.train.n_rows:
        raise PartitionError(f"{m} edges x {s_train} train rows need {need_train} rows, "
                             f"only {split.train.n_rows} available")
    if need_test > split.test.n_rows:
        raise PartitionError(f"{m} edges x {s_test} test rows need {need_test} rows, "
                             f"only {split.test.n_rows} available")

    edges = []
    p, q, r, s = 0, s_train, 0, s_test
    for k in range(1, m + 1):
        edges.append(SplitPair(
            train=split.train.subset(np.arange(p, q)),
            test=split.test.subset(np.arange(r, s)),
        ))
        p, q = q, (k + 1) * s_train
        r, s = s, (k + 1) * s_test

    central = None
    if split.train.n_rows > need_train and split.test.n_rows > need_test:
        central = SplitPair(
            train=split.train.subset(np.arange(need_train, split.train.n_rows)),
            test=split.test.subset(np.arange(need_test, split.test.n_rows)),
        )
    else:
        logger.warning("No rows left for a central-cloud block")

    logger.info(f"Partitioned {m} edges: {s_train} train / {s_test} test rows each; central block "
                f"{'absent' if central is None else f'{central.train.n_rows} / {central.test.n_rows}'}")
    return EdgePartition(edges=edges, m=m, s_train=s_train, s_test=s_test, central=central)
