"""
Mini-batch training loop and the per-epoch training trace.
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.nn.backprop import backward, rmse_loss
from src.nn.config import TrainConfig
from src.nn.network import Network, forward, predict
from src.nn.optim import AdamState, adam_step, sgd_step
from src.utils.errors import ConfigurationError, DivergedError, EmptyDatasetError, ShapeError
from src.utils.helpers import hash_arrays

logger = logging.getLogger(__name__)

# Second entropy word for the shuffle stream, so it never coincides with init
SHUFFLE_STREAM = 0x5EED


@dataclass
class TrainTrace:
    """
    Per-epoch record of one training run.

    ``signed_sums[e, l]`` and ``l1_sums[e, l]`` are the sum and absolute sum
    of the weights of layer ``l + 1`` after epoch ``e + 1``; they feed the
    layer analysis. ``seconds`` is wall-clock and excluded from digests.
    """
    shape: List[int]
    train_rmse: List[float] = field(default_factory=list)
    val_rmse: List[float] = field(default_factory=list)
    signed_sums: List[np.ndarray] = field(default_factory=list)
    l1_sums: List[np.ndarray] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    config: Dict = field(default_factory=dict)

    @property
    def n_epochs(self) -> int:
        return len(self.train_rmse)

    @property
    def n_layers(self) -> int:
        return len(self.shape) - 1

    def record(self, net: Network, train_loss: float, val_loss: float, seconds: float) -> None:
        self.train_rmse.append(float(train_loss))
        self.val_rmse.append(float(val_loss))
        self.signed_sums.append(np.array([layer.weights.sum() for layer in net.layers]))
        self.l1_sums.append(np.array([np.abs(layer.weights).sum() for layer in net.layers]))
        self.seconds.append(float(seconds))

    def signed_matrix(self) -> np.ndarray:
        return np.vstack(self.signed_sums) if self.signed_sums else np.zeros((0, self.n_layers))

    def l1_matrix(self) -> np.ndarray:
        return np.vstack(self.l1_sums) if self.l1_sums else np.zeros((0, self.n_layers))

    def digest(self) -> str:
        """Hash of every deterministic field (losses and weight sums)."""
        return hash_arrays([
            np.asarray(self.shape), np.asarray(self.train_rmse), np.asarray(self.val_rmse),
            self.signed_matrix(), self.l1_matrix(),
        ])

    def to_frame(self, include_seconds: bool = True) -> pd.DataFrame:
        """
        Trace as a DataFrame: epoch, train_rmse, val_rmse, w_sum_<l>, w_abs_<l>[, seconds].
        """
        df = pd.DataFrame({
            'epoch': np.arange(1, self.n_epochs + 1),
            'train_rmse': self.train_rmse,
            'val_rmse': self.val_rmse,
        })
        signed, l1 = self.signed_matrix(), self.l1_matrix()
        for idx in range(self.n_layers):
            df[f'w_sum_{idx + 1}'] = signed[:, idx] if len(signed) else []
        for idx in range(self.n_layers):
            df[f'w_abs_{idx + 1}'] = l1[:, idx] if len(l1) else []
        if include_seconds:
            df['seconds'] = self.seconds
        return df

    def save_csv(self, path: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        logger.info(f"Saved trace ({self.n_epochs} epochs) to {path}")
        return path

    @classmethod
    def from_frame(cls, df: pd.DataFrame, shape: Optional[List[int]] = None) -> 'TrainTrace':
        sum_cols = sorted((c for c in df.columns if c.startswith('w_sum_')), key=lambda c: int(c[6:]))
        abs_cols = sorted((c for c in df.columns if c.startswith('w_abs_')), key=lambda c: int(c[6:]))
        if len(sum_cols) != len(abs_cols):
            raise ShapeError("Trace has mismatched w_sum_/w_abs_ columns")
        if shape is None:
            shape = [0] * (len(sum_cols) + 1)
        elif len(shape) - 1 != len(sum_cols):
            raise ShapeError(f"Trace has {len(sum_cols)} layers but shape {shape} has {len(shape) - 1}")
        trace = cls(shape=list(shape))
        trace.train_rmse = df['train_rmse'].astype(float).tolist()
        trace.val_rmse = df['val_rmse'].astype(float).tolist()
        trace.signed_sums = [row for row in df[sum_cols].to_numpy(dtype=np.float64)]
        trace.l1_sums = [row for row in df[abs_cols].to_numpy(dtype=np.float64)]
        trace.seconds = df['seconds'].astype(float).tolist() if 'seconds' in df else [0.0] * len(df)
        return trace

    @classmethod
    def load_csv(cls, path: str, shape: Optional[List[int]] = None) -> 'TrainTrace':
        return cls.from_frame(pd.read_csv(path), shape=shape)


def iterate_minibatches(n_rows: int, batch_size: Optional[int], rng: np.random.Generator) -> Iterator[np.ndarray]:
    """
    Yield row-index arrays for one epoch.

    Rows are permuted with ``rng``; a falsy batch size yields one full batch.
    """
    order = rng.permutation(n_rows)
    size = n_rows if not batch_size else int(batch_size)
    for start in range(0, n_rows, size):
        yield order[start:start + size]


def shuffle_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), SHUFFLE_STREAM])


def _check_data(net: Network, data: np.ndarray, what: str) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise EmptyDatasetError(f"{what} data must be a non-empty matrix, got shape {data.shape}")
    if data.shape[1] != net.input_dim or net.output_dim != net.input_dim:
        raise ShapeError(f"{what} data has {data.shape[1]} columns; network maps "
                         f"{net.input_dim} -> {net.output_dim}", layer=1)
    return data


def train(net: Network, train_data: np.ndarray, val_data: Optional[np.ndarray],
          config: TrainConfig, state: Optional[AdamState] = None,
          desc: str = "Training") -> TrainTrace:
    """
    Train an autoencoder (targets are the inputs) for exactly ``config.epochs`` epochs.

    Mini-batch order comes from a generator seeded by ``config.seed``, so a
    fixed seed, config and data give a bit-identical trace.

    Args:
        net: Network updated in place
        train_data: Training matrix
        val_data: Validation matrix, or None (val_rmse is then NaN)
        config: Hyperparameters
        state: Adam accumulators to continue from (fresh if None)
        desc: Progress-bar label

    Returns:
        TrainTrace with one entry per epoch
    """
    config.validate()
    x_train = _check_data(net, train_data, "Training")
    x_val = _check_data(net, val_data, "Validation") if val_data is not None else None
    if config.optimizer == 'adam' and state is None:
        state = AdamState.zeros_like(net)

    rng = shuffle_rng(config.seed)
    trace = TrainTrace(shape=net.shape, config=config.to_dict())
    epochs = tqdm(range(1, config.epochs + 1), desc=desc, disable=not config.progress, leave=False)
    for epoch in epochs:
        started = time.perf_counter()
        for idx in iterate_minibatches(x_train.shape[0], config.batch_size, rng):
            batch = x_train[idx]
            _, cache = forward(net, batch)
            grads = backward(net, cache, batch, config.l2_lambda, config.regularize_bias)
            if not np.isfinite(grads.loss):
                raise DivergedError(f"Loss became {grads.loss} during epoch {epoch}", epoch=epoch)
            if config.optimizer == 'adam':
                adam_step(net, grads, state, config)
            else:
                sgd_step(net, grads, config.learning_rate)

        train_loss = rmse_loss(predict(net, x_train), x_train)
        val_loss = rmse_loss(predict(net, x_val), x_val) if x_val is not None else float('nan')
        if not np.isfinite(train_loss) or (x_val is not None and not np.isfinite(val_loss)):
            raise DivergedError(f"Loss became non-finite at epoch {epoch}", epoch=epoch)
        trace.record(net, train_loss, val_loss, time.perf_counter() - started)
        logger.debug(f"{desc} epoch {epoch}: train_rmse={train_loss:.6g} val_rmse={val_loss:.6g}")

    return trace
