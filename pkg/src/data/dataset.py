"""
Immutable dataset containers: Dataset, SplitPair, EdgePartition.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.utils.errors import EmptyDatasetError, NonFiniteDataError, ShapeError
from src.utils.helpers import hash_arrays


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class NormalizationRecord:
    """
    Per-feature ``(x - offset) / scale`` transform.

    For minmax offset/scale are min and max - min; for zscore mean and std.
    Constant features (scale 0) map to 0 and are flagged in ``constant``.
    """
    method: str
    offset: np.ndarray
    scale: np.ndarray
    constant: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.offset.shape[0]:
            raise ShapeError(f"Record covers {self.offset.shape[0]} features, data has {x.shape[-1]}")
        safe_scale = np.where(self.constant, 1.0, self.scale)
        out = (x - self.offset) / safe_scale
        out[..., self.constant] = 0.0
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'method': self.method,
            'offset': self.offset.tolist(),
            'scale': self.scale.tolist(),
            'constant': self.constant.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NormalizationRecord':
        return cls(
            method=data['method'],
            offset=np.asarray(data['offset'], dtype=np.float64),
            scale=np.asarray(data['scale'], dtype=np.float64),
            constant=np.asarray(data['constant'], dtype=bool),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Feature matrix with optional binary labels (0 normal, 1 attack).

    ``row_ids`` identify rows across splits and partitions so overlap between
    edge and central data can be checked. Arrays are read-only.
    """
    features: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Tuple[str, ...] = ()
    normalization: Optional[NormalizationRecord] = None
    row_ids: Optional[np.ndarray] = None
    manifest: Dict[str, Any] = field(default_factory=dict)
    dropped_rows: int = 0

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise ShapeError(f"features must be a matrix, got shape {features.shape}")
        if not np.isfinite(features).all():
            raise NonFiniteDataError("features contain NaN or infinite values")
        object.__setattr__(self, 'features', _readonly(features))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (features.shape[0],):
                raise ShapeError(f"{labels.shape[0]} labels for {features.shape[0]} rows")
            object.__setattr__(self, 'labels', _readonly(labels))
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(features.shape[1]))
        if len(names) != features.shape[1]:
            raise ShapeError(f"{len(names)} feature names for {features.shape[1]} columns")
        object.__setattr__(self, 'feature_names', names)
        row_ids = np.arange(features.shape[0]) if self.row_ids is None else np.asarray(self.row_ids, dtype=np.int64)
        if row_ids.shape != (features.shape[0],):
            raise ShapeError("row_ids must have one entry per row")
        object.__setattr__(self, 'row_ids', _readonly(row_ids))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def subset(self, index: Sequence[int]) -> 'Dataset':
        """Rows at ``index`` (positions, not row ids), keeping metadata."""
        index = np.asarray(index, dtype=np.int64)
        return replace(
            self,
            features=self.features[index],
            labels=None if self.labels is None else self.labels[index],
            row_ids=self.row_ids[index],
            dropped_rows=0,
        )

    def normal_only(self) -> 'Dataset':
        """Rows labeled 0; the dataset itself when unlabeled."""
        if self.labels is None:
            return self
        return self.subset(np.flatnonzero(self.labels == 0))

    def with_features(self, features: np.ndarray, normalization: Optional[NormalizationRecord] = None) -> 'Dataset':
        return replace(self, features=features,
                       normalization=normalization if normalization is not None else self.normalization)

    def content_hash(self) -> str:
        """Hash of features, labels and row ids."""
        arrays = [self.features, self.row_ids]
        if self.labels is not None:
            arrays.append(self.labels)
        return hash_arrays(arrays)

    def to_frame(self, label_column: str = 'label') -> pd.DataFrame:
        df = pd.DataFrame(self.features, columns=list(self.feature_names))
        if self.labels is not None:
            df[label_column] = self.labels
        return df

    @classmethod
    def concat(cls, parts: Sequence['Dataset']) -> 'Dataset':
        if not parts:
            raise EmptyDatasetError("Nothing to concatenate")
        labels = None
        if all(p.labels is not None for p in parts):
            labels = np.concatenate([p.labels for p in parts])
        return replace(
            parts[0],
            features=np.vstack([p.features for p in parts]),
            labels=labels,
            row_ids=np.concatenate([p.row_ids for p in parts]),
            dropped_rows=0,
        )


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset


@dataclass(frozen=True, eq=False)
class EdgePartition:
    """
    Per-edge train/test blocks carved from a SplitPair, plus the rows no
    edge received (the central-cloud block, None when empty).
    """
    edges: List[SplitPair]
    m: int
    s_train: int
    s_test: int
    central: Optional[SplitPair] = None

    def edge(self, k: int) -> SplitPair:
        """Edge ``k`` (1-indexed)."""
        return self.edges[k - 1]

    def edge_row_ids(self) -> np.ndarray:
        """Row ids used by any edge (train and test)."""
        ids = [np.concatenate([e.train.row_ids, e.test.row_ids]) for e in self.edges]
        return np.concatenate(ids) if ids else np.array([], dtype=np.int64)

    def summary(self) -> pd.DataFrame:
        rows = []
        for k, pair in enumerate(self.edges, start=1):
            rows.append({'block': f'edge{k}', 'train_rows': pair.train.n_rows, 'test_rows': pair.test.n_rows})
        if self.central is not None:
            rows.append({'block': 'central', 'train_rows': self.central.train.n_rows,
                         'test_rows': self.central.test.n_rows})
        return pd.DataFrame(rows)
