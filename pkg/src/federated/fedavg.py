"""
Federated averaging: broadcast the global model, train locally at every
client, average parameters weighted by client sample counts, repeat.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.data.dataset import Dataset, EdgePartition
from src.edge.trainer import evaluate_edge
from src.federated.config import BYTES_PER_PARAM, FLConfig
from src.nn.backprop import rmse_loss
from src.nn.network import DenseLayer, Network, init_network, predict
from src.nn.training import train
from src.utils.errors import CalibrationError, ConfigurationError, DivergedError, EmptyDatasetError, ShapeError
from src.utils.helpers import derive_seed, hash_arrays

logger = logging.getLogger(__name__)


@dataclass
class FLTrace:
    """One entry per round; ``client_losses[r][i]`` is client i+1's final local RMSE in round r+1."""
    shape: List[int]
    clients: int
    local_epochs: int
    val_loss: List[float] = field(default_factory=list)
    val_accuracy: List[Optional[float]] = field(default_factory=list)
    client_losses: List[List[float]] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    n_params: int = 0
    config: Dict = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return len(self.val_loss)

    @property
    def val_rmse(self) -> List[float]:
        return self.val_loss

    @property
    def bytes_per_round(self) -> int:
        """Download plus upload of every parameter for every client."""
        return 2 * self.n_params * self.clients * BYTES_PER_PARAM

    @property
    def bytes_exchanged(self) -> int:
        return self.bytes_per_round * self.rounds

    @property
    def total_local_epochs(self) -> int:
        """Local epochs run by one client over all rounds."""
        return self.rounds * self.local_epochs

    def bytes_until(self, round_index: int) -> int:
        return self.bytes_per_round * round_index

    def record(self, val_loss: float, accuracy: Optional[float], client_losses: Sequence[float],
               seconds: float) -> None:
        self.val_loss.append(float(val_loss))
        self.val_accuracy.append(None if accuracy is None else float(accuracy))
        self.client_losses.append([float(x) for x in client_losses])
        self.seconds.append(float(seconds))

    def digest(self) -> str:
        acc = [np.nan if a is None else a for a in self.val_accuracy]
        return hash_arrays([np.asarray(self.shape), np.asarray(self.val_loss), np.asarray(acc, dtype=float),
                            np.asarray(self.client_losses, dtype=float)])

    def to_frame(self, include_seconds: bool = True) -> pd.DataFrame:
        """round, global_val_loss, global_val_acc, client_<i>_loss[, seconds]."""
        df = pd.DataFrame({
            'round': np.arange(1, self.rounds + 1),
            'global_val_loss': self.val_loss,
            'global_val_acc': [np.nan if a is None else a for a in self.val_accuracy],
        })
        losses = np.asarray(self.client_losses, dtype=float).reshape(self.rounds, self.clients)
        for i in range(self.clients):
            df[f'client_{i + 1}_loss'] = losses[:, i]
        if include_seconds:
            df['seconds'] = self.seconds
        return df

    def save_csv(self, path: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        return path

    @classmethod
    def load_csv(cls, path: str, shape: Optional[List[int]] = None, local_epochs: int = 0,
                 n_params: int = 0) -> 'FLTrace':
        df = pd.read_csv(path)
        client_cols = [c for c in df.columns if c.startswith('client_') and c.endswith('_loss')]
        trace = cls(shape=list(shape or []), clients=len(client_cols), local_epochs=local_epochs,
                    n_params=n_params)
        for _, row in df.iterrows():
            acc = row['global_val_acc']
            trace.record(row['global_val_loss'], None if pd.isna(acc) else acc,
                         [row[c] for c in client_cols], row.get('seconds', np.nan))
        return trace


def fl_broadcast(global_net: Network, m: int) -> List[Network]:
    """``m`` independent, bit-identical copies of the global model."""
    global_net.validate()
    return [global_net.copy() for _ in range(m)]


def local_seed(master_seed: int, round_index: int, client: int) -> int:
    """Shuffle seed of client ``client`` in round ``round_index`` (both 1-indexed)."""
    return derive_seed(master_seed, client, round_index)


def fl_local_update(net: Network, data: np.ndarray, config: FLConfig, seed: int) -> Tuple[Network, float]:
    """
    Train one client copy in place for ``config.local_epochs`` epochs.

    Plain mini-batch SGD with step ``edge_lr`` and L2 factor ``l2_reg``,
    through the same loop as centralized training.

    Returns:
        (net, final local training RMSE)
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise EmptyDatasetError("Client data is empty")
    trace = train(net, data, None, config.local_train_config(seed), desc="Local update")
    return net, trace.train_rmse[-1]


def fl_aggregate(clients: Sequence[Network], counts: Sequence[int]) -> Network:
    """
    Sample-weighted parameter average, weights N_i / sum(N).

    Computed as ``p_1 + sum_i w_i (p_i - p_1)`` so identical clients
    reproduce their parameters exactly.

    Args:
        clients: Client networks with identical shapes
        counts: Sample count per client

    Returns:
        New network (activations and origins from the first client)
    """
    if not clients:
        raise ShapeError("No client models to aggregate")
    if len(counts) != len(clients):
        raise ShapeError(f"{len(counts)} sample counts for {len(clients)} clients")
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(counts < 0) or counts.sum() <= 0:
        raise ConfigurationError(f"Sample counts must be non-negative with a positive total, got {counts.tolist()}")
    base = clients[0]
    for i, net in enumerate(clients[1:], start=2):
        if net.shape != base.shape:
            raise ShapeError(f"Client {i} has shape {net.shape}, client 1 has {base.shape}")
    weights = counts / counts.sum()

    layers = []
    for t, layer in enumerate(base.layers):
        w = layer.weights.copy()
        b = layer.biases.copy()
        for net, weight in zip(clients[1:], weights[1:]):
            w += weight * (net.layers[t].weights - layer.weights)
            b += weight * (net.layers[t].biases - layer.biases)
        layers.append(DenseLayer(w, b, layer.activation, layer.origin))
    return Network(layers)


def server_update(old: Network, aggregate: Network, central_lr: float) -> Network:
    """old + central_lr * (aggregate - old); the aggregate itself when central_lr == 1."""
    if central_lr == 1.0:
        return aggregate
    layers = [
        DenseLayer(o.weights + central_lr * (a.weights - o.weights),
                   o.biases + central_lr * (a.biases - o.biases), o.activation, o.origin)
        for o, a in zip(old.layers, aggregate.layers)
    ]
    return Network(layers)


def _evaluate(net: Network, val: Optional[Dataset], calibration: Optional[Dataset],
              normal_only: bool) -> Tuple[float, Optional[float]]:
    """Global loss on (normal) validation rows and detection accuracy on all of them."""
    if val is None:
        return float('nan'), None
    loss_set = val.normal_only() if normal_only else val
    loss = rmse_loss(predict(net, loss_set.features), loss_set.features)
    if not val.has_labels:
        return loss, None
    try:
        return loss, evaluate_edge(net, val, calibration=calibration).accuracy
    except CalibrationError as e:
        logger.debug(f"Accuracy not available: {e}")
        return loss, None


def fl_run(partition: EdgePartition, config: FLConfig, validation: Optional[Dataset] = None,
           calibration: Optional[Dataset] = None, train_normal_only: bool = False,
           initial: Optional[Network] = None) -> Tuple[FLTrace, Network]:
    """
    Run ``config.rounds`` rounds of broadcast, local update and aggregation.

    Client i trains on edge block i. The global model is evaluated after
    every round on ``validation`` (default: the central test block).

    Args:
        partition: Client blocks (one per client) and the central block
        config: FedAvg settings
        validation: Rows for the per-round global loss and accuracy
        calibration: Rows whose normal scores set the accuracy threshold
        train_normal_only: Train clients on their normal rows only
        initial: Starting global model (fresh from ``config.seed`` otherwise)

    Returns:
        (FLTrace, final global network)
    """
    config.validate()
    if partition.m != config.clients:
        raise ConfigurationError(f"FL config has {config.clients} clients, partition has {partition.m} edge blocks")
    client_sets = [partition.edge(k).train for k in range(1, partition.m + 1)]
    if train_normal_only:
        client_sets = [ds.normal_only() for ds in client_sets]
    for k, ds in enumerate(client_sets, start=1):
        if ds.n_rows == 0:
            raise EmptyDatasetError(f"Client {k} has no training rows")
    if validation is None and partition.central is not None:
        validation = partition.central.test
    if calibration is None and partition.central is not None:
        calibration = partition.central.train

    n_features = client_sets[0].n_features
    shape = config.resolve_shape(n_features)
    global_net = initial.copy() if initial is not None else init_network(shape, config=config.init_config())
    counts = [ds.n_rows for ds in client_sets]

    logger.info("=" * 60)
    logger.info(f"FedAvg: {config.clients} clients, {config.rounds} rounds x {config.local_epochs} local epochs, "
                f"shape {global_net.shape}")
    logger.info("=" * 60)

    trace = FLTrace(shape=global_net.shape, clients=config.clients, local_epochs=config.local_epochs,
                    n_params=global_net.n_params, config=config.to_dict())

    def client_update(r: int, i: int, net: Network) -> Tuple[Network, float]:
        try:
            return fl_local_update(net, client_sets[i - 1].features, config, local_seed(config.seed, r, i))
        except DivergedError as e:
            raise DivergedError(f"Client {i} diverged in round {r} (local epoch {e.epoch})",
                                epoch=e.epoch, round_index=r, client=i) from e

    rounds = tqdm(range(1, config.rounds + 1), desc="FL rounds", disable=not config.progress)
    for r in rounds:
        started = time.perf_counter()
        copies = fl_broadcast(global_net, config.clients)
        if config.parallel and config.clients > 1:
            with ThreadPoolExecutor(max_workers=config.clients) as pool:
                results = list(pool.map(client_update, [r] * config.clients,
                                        range(1, config.clients + 1), copies))
        else:
            results = [client_update(r, i, net) for i, net in enumerate(copies, start=1)]

        aggregate = fl_aggregate([net for net, _ in results], counts)
        global_net = server_update(global_net, aggregate, config.central_lr)
        val_loss, accuracy = _evaluate(global_net, validation, calibration, train_normal_only)
        trace.record(val_loss, accuracy, [loss for _, loss in results], time.perf_counter() - started)
        logger.debug(f"Round {r}: val_loss={val_loss:.6g}")

    logger.info(f"FedAvg finished: final val loss {trace.val_loss[-1]:.6g}, "
                f"{trace.bytes_exchanged} bytes exchanged")
    return trace, global_net
