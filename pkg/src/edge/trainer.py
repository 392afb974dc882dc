"""
Edge-cloud training: build, train and validate one autoencoder per edge.

Each edge trains independently on its own block with seed ``master ^ k``,
so the result does not depend on training order or on running edges in
parallel threads.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.data.dataset import Dataset, EdgePartition, SplitPair
from src.detection.detector import Threshold, calibrate, classify, score
from src.nn.backprop import rmse_loss
from src.nn.config import TrainConfig
from src.nn.network import Network, init_network, predict
from src.nn.serialization import load_network, save_network
from src.nn.training import TrainTrace, train
from src.utils.errors import DivergedError, ShapeError
from src.utils.helpers import derive_seed, load_json, save_json

logger = logging.getLogger(__name__)


@dataclass
class EdgeModelSet:
    """Trained edge models (index k-1 holds edge k) with their traces."""
    models: List[Network]
    traces: List[TrainTrace]
    partition: Optional[EdgePartition] = None
    config: Dict = field(default_factory=dict)
    seeds: List[int] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.models)

    def model(self, k: int) -> Network:
        """Edge ``k`` (1-indexed)."""
        return self.models[k - 1]

    def summary(self) -> pd.DataFrame:
        rows = []
        for k, (net, trace) in enumerate(zip(self.models, self.traces), start=1):
            rows.append({
                'edge': k,
                'shape': net.shape,
                'params': net.n_params,
                'epochs': trace.n_epochs,
                'final_train_rmse': trace.train_rmse[-1] if trace.n_epochs else np.nan,
                'final_val_rmse': trace.val_rmse[-1] if trace.n_epochs else np.nan,
                'min_val_rmse': np.nanmin(trace.val_rmse) if trace.n_epochs else np.nan,
            })
        return pd.DataFrame(rows)


def edge_seed(master_seed: int, k: int) -> int:
    """Seed for edge k: master XOR k."""
    return derive_seed(master_seed, k)


def train_single_edge(k: int, pair: SplitPair, shape: Sequence[int], config: TrainConfig,
                      train_normal_only: bool = False) -> tuple:
    """
    Initialize and train edge ``k``'s autoencoder on its block.

    Returns:
        (network, trace, seed)
    """
    seed = edge_seed(config.seed, k)
    edge_config = config.replace(seed=seed)
    train_set = pair.train.normal_only() if train_normal_only else pair.train
    val_set = pair.test.normal_only() if train_normal_only else pair.test
    net = init_network(shape, config=edge_config)
    try:
        trace = train(net, train_set.features, val_set.features if val_set.n_rows else None,
                      edge_config, desc=f"Edge {k}")
    except DivergedError as e:
        raise DivergedError(f"Edge {k} diverged at epoch {e.epoch}", epoch=e.epoch, edge=k) from e
    return net, trace, seed


def train_edges(partition: EdgePartition, shape: Sequence[int], config: TrainConfig,
                parallel: bool = False, train_normal_only: bool = False) -> EdgeModelSet:
    """
    Train one autoencoder per edge block.

    Args:
        partition: Edge blocks
        shape: Full width list; first and last entries must equal the feature count
        config: Hyperparameters; ``config.seed`` is the master seed
        parallel: Train edges in threads (results equal serial execution)
        train_normal_only: Drop attack-labeled rows from each edge's blocks

    Returns:
        EdgeModelSet
    """
    config.validate()
    n_features = partition.edges[0].train.n_features
    shape = list(shape)
    if shape[0] != n_features or shape[-1] != n_features:
        raise ShapeError(f"Edge shape {shape} does not map {n_features} features back to themselves")

    logger.info("=" * 60)
    logger.info(f"Training {partition.m} edge models, shape {shape}, {config.epochs} epochs")
    logger.info("=" * 60)

    ks = list(range(1, partition.m + 1))
    if parallel and partition.m > 1:
        with ThreadPoolExecutor(max_workers=partition.m) as pool:
            futures = [pool.submit(train_single_edge, k, partition.edge(k), shape, config, train_normal_only)
                       for k in ks]
            results = [f.result() for f in futures]
    else:
        results = [train_single_edge(k, partition.edge(k), shape, config, train_normal_only)
                   for k in tqdm(ks, desc="Edges", disable=not config.progress)]

    edges = EdgeModelSet(
        models=[r[0] for r in results],
        traces=[r[1] for r in results],
        partition=partition,
        config=config.to_dict(),
        seeds=[r[2] for r in results],
    )
    for k, trace in enumerate(edges.traces, start=1):
        logger.info(f"Edge {k}: final train RMSE {trace.train_rmse[-1]:.5g}, val RMSE {trace.val_rmse[-1]:.5g}")
    return edges


@dataclass(frozen=True)
class EdgeEvaluation:
    rmse: float
    accuracy: Optional[float]
    threshold: Optional[Threshold]


def evaluate_edge(model: Network, test: Dataset, threshold: Optional[Threshold] = None,
                  calibration: Optional[Dataset] = None, method: str = 'percentile:0.99') -> EdgeEvaluation:
    """
    Reconstruction RMSE on ``test`` and, when labeled, detection accuracy.

    The threshold is taken as given, else calibrated with ``method`` on the
    normal rows of ``calibration`` (defaults to the normal rows of ``test``).

    Args:
        model: Trained autoencoder
        test: Evaluation rows
        threshold: Pre-computed threshold
        calibration: Rows to calibrate on
        method: Calibration method spec

    Returns:
        EdgeEvaluation; accuracy and threshold are None for unlabeled data
    """
    if test.n_features != model.input_dim:
        raise ShapeError(f"Test data has {test.n_features} features, model expects {model.input_dim}", layer=1)
    rmse = rmse_loss(predict(model, test.features), test.features)
    if not test.has_labels:
        return EdgeEvaluation(rmse, None, threshold)
    if threshold is None:
        calib = (calibration if calibration is not None else test).normal_only()
        threshold = calibrate(score(model, calib.features), method)
    report = classify(score(model, test.features), threshold, test.labels)
    return EdgeEvaluation(rmse, report.accuracy, threshold)


def save_edge_models(edges: EdgeModelSet, out_dir: str) -> List[Path]:
    """
    Write ``edge<k>.bin`` and ``edge<k>_trace.csv`` per edge plus ``edges.json``.

    Returns:
        Paths of the model files
    """
    out = Path(out_dir)
    paths = []
    for k, (net, trace, seed) in enumerate(zip(edges.models, edges.traces, edges.seeds), start=1):
        path = save_network(net, out / f"edge{k}.bin", seed=seed, config=edges.config, extra={'edge': k})
        trace.save_csv(out / f"edge{k}_trace.csv")
        paths.append(path)
    save_json({'m': edges.m, 'seeds': edges.seeds, 'config': edges.config,
               'models': [p.name for p in paths]}, str(out / 'edges.json'))
    return paths


def load_edge_models(out_dir: str) -> EdgeModelSet:
    """Read a directory written by save_edge_models()."""
    out = Path(out_dir)
    index = load_json(str(out / 'edges.json'))
    models, traces = [], []
    for k, name in enumerate(index['models'], start=1):
        net, _ = load_network(out / name)
        models.append(net)
        traces.append(TrainTrace.load_csv(out / f"edge{k}_trace.csv", shape=net.shape))
    return EdgeModelSet(models=models, traces=traces, config=index.get('config', {}), seeds=index.get('seeds', []))
