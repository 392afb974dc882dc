"""
Synthetic flow-metadata with injected integrity-violation anomalies.

Normal rows follow per-feature Gaussians N(mean_j, std_j^2). With
``latent_dim`` set, features are correlated through a low-dimensional
latent factor while keeping those marginals exactly. Attack rows use the
same distribution shifted by ``attack_shift * std_j``.
"""
import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from src.data.dataset import Dataset, EdgePartition, SplitPair
from src.utils.errors import ConfigurationError
from src.utils.helpers import load_json, save_json

logger = logging.getLogger(__name__)

Number = Union[float, Sequence[float]]


def _per_feature(value: Number, dim: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=np.float64), (dim,)) if np.ndim(value) == 0 \
        else np.asarray(value, dtype=np.float64)
    if arr.shape != (dim,):
        raise ConfigurationError(f"{name} must be a scalar or have {dim} entries, got {len(arr)}")
    return np.array(arr)


@dataclass(frozen=True)
class SynthConfig:
    n_normal: int = 2000
    n_attack: int = 200
    dim: int = 20
    normal_mean: Number = 0.0
    normal_std: Number = 1.0
    attack_shift: Number = 3.0
    latent_dim: Optional[int] = None
    noise: float = 0.1
    seed: int = 0

    def validate(self) -> 'SynthConfig':
        if self.n_normal < 1 or self.n_attack < 0 or self.dim < 1:
            raise ConfigurationError("n_normal and dim must be positive, n_attack non-negative")
        if self.latent_dim is not None and not 1 <= self.latent_dim <= self.dim:
            raise ConfigurationError(f"latent_dim must lie in [1, {self.dim}]")
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigurationError("noise must lie in [0, 1]")
        if np.any(_per_feature(self.normal_std, self.dim, 'normal_std') <= 0):
            raise ConfigurationError("normal_std must be positive")
        _per_feature(self.normal_mean, self.dim, 'normal_mean')
        _per_feature(self.attack_shift, self.dim, 'attack_shift')
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ('normal_mean', 'normal_std', 'attack_shift'):
            if np.ndim(data[key]):
                data[key] = [float(v) for v in data[key]]
        return data

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], **overrides: Any) -> 'SynthConfig':
        known = {f.name for f in fields(cls)}
        merged = {k: v for k, v in (data or {}).items() if k in known}
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**merged)


def _core_sampler(cfg: SynthConfig, rng: np.random.Generator):
    """Return a function drawing unit-marginal rows for this config."""
    if cfg.latent_dim is None:
        return lambda n: rng.standard_normal((n, cfg.dim))
    loading = rng.standard_normal((cfg.latent_dim, cfg.dim))
    loading /= np.linalg.norm(loading, axis=0, keepdims=True)
    signal, noise = np.sqrt(1.0 - cfg.noise), np.sqrt(cfg.noise)

    def draw(n: int) -> np.ndarray:
        z = rng.standard_normal((n, cfg.latent_dim))
        return signal * (z @ loading) + noise * rng.standard_normal((n, cfg.dim))
    return draw


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """
    Draw a labeled synthetic dataset.

    Args:
        cfg: Counts, dimensions, distribution and seed

    Returns:
        Dataset (rows shuffled, labels 0 normal / 1 attack) with the
        generating config embedded as its manifest
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    mean = _per_feature(cfg.normal_mean, cfg.dim, 'normal_mean')
    std = _per_feature(cfg.normal_std, cfg.dim, 'normal_std')
    shift = _per_feature(cfg.attack_shift, cfg.dim, 'attack_shift')
    draw = _core_sampler(cfg, rng)

    normal = mean + std * draw(cfg.n_normal)
    attack = mean + shift * std + std * draw(cfg.n_attack)
    features = np.vstack([normal, attack])
    labels = np.concatenate([np.zeros(cfg.n_normal, dtype=np.int64), np.ones(cfg.n_attack, dtype=np.int64)])
    order = rng.permutation(features.shape[0])

    manifest = {
        'generator': 'synthetic-flow-metadata',
        'config': cfg.to_dict(),
        'attack_shift_sigma': shift.tolist(),
    }
    logger.info(f"Generated {cfg.n_normal} normal + {cfg.n_attack} attack rows, dim {cfg.dim}")
    return Dataset(
        features=features[order],
        labels=labels[order],
        feature_names=tuple(f"f{i}" for i in range(cfg.dim)),
        manifest=manifest,
    )


def save_dataset(ds: Dataset, csv_path: str, label_column: str = 'label') -> Path:
    """
    Write a dataset as CSV plus a ``<name>.manifest.json`` sidecar.

    Returns:
        Path of the CSV file
    """
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    ds.to_frame(label_column).to_csv(csv_path, index=False, float_format='%.17g')
    save_json(ds.manifest, str(manifest_path(csv_path)))
    logger.info(f"Saved {ds.n_rows} rows to {csv_path}")
    return csv_path


def manifest_path(csv_path: Union[str, Path]) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + '.manifest.json')


def load_manifest(csv_path: Union[str, Path]) -> Dict[str, Any]:
    path = manifest_path(csv_path)
    return load_json(str(path)) if path.exists() else {}


def apply_edge_jitter(partition: EdgePartition, jitter: float, seed: int) -> EdgePartition:
    """
    Shift each edge's feature means to emulate heterogeneous catchment areas.

    Edge k's train and test rows get the same offset, drawn as
    N(0, jitter^2) times that edge's per-feature train std. The central
    block is left untouched.

    Args:
        partition: Partition to perturb
        jitter: Offset scale in units of feature std (0 returns the input)
        seed: Seed for the offsets

    Returns:
        New EdgePartition
    """
    if jitter == 0:
        return partition
    rng = np.random.default_rng(seed)
    edges: List[SplitPair] = []
    for pair in partition.edges:
        std = pair.train.features.std(axis=0)
        offset = rng.normal(0.0, jitter, size=pair.train.n_features) * np.where(std > 0, std, 1.0)
        edges.append(SplitPair(
            train=pair.train.with_features(pair.train.features + offset),
            test=pair.test.with_features(pair.test.features + offset),
        ))
    return replace(partition, edges=edges)
