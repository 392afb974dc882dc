"""
Per-layer weight-sum statistics over training.

For hidden layer l (1 = first hidden layer; the output layer is excluded)
and epoch e:

    alpha[e, l] = S[e, l] / sum over hidden layers of S[e, :]
    beta[e, l]  = S[e, l] / S[e, last hidden]

where S is either the signed weight sum (can cancel and cross zero) or the
L1 sum. Signed ratios whose denominator vanishes are NaN and their epochs
are listed in ``undefined_alpha_epochs`` / ``undefined_beta_epochs``.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from src.nn.training import TrainTrace
from src.utils.errors import ShapeError

logger = logging.getLogger(__name__)

VARIANTS = ('signed', 'l1')

# Relative size below which a signed denominator counts as zero
ZERO_TOLERANCE = 1e-12

STATS_COLUMNS = ['epoch', 'layer', 'signed_sum', 'l1_sum', 'alpha_signed', 'alpha_l1', 'beta_signed', 'beta_l1']


@dataclass
class LayerStats:
    """Arrays are (epochs x hidden layers) unless noted; epochs are 1-indexed in outputs."""
    model_id: int
    signed_sums: np.ndarray
    l1_sums: np.ndarray
    total_signed: np.ndarray
    total_l1: np.ndarray
    last_signed: np.ndarray
    last_l1: np.ndarray
    alpha_signed: np.ndarray
    alpha_l1: np.ndarray
    beta_signed: np.ndarray
    beta_l1: np.ndarray
    undefined_alpha_epochs: List[int] = field(default_factory=list)
    undefined_beta_epochs: List[int] = field(default_factory=list)

    @property
    def n_epochs(self) -> int:
        return self.signed_sums.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.signed_sums.shape[1]

    def alpha(self, variant: str = 'l1') -> np.ndarray:
        return self.alpha_l1 if variant == 'l1' else self.alpha_signed

    def beta(self, variant: str = 'l1') -> np.ndarray:
        return self.beta_l1 if variant == 'l1' else self.beta_signed

    def to_frame(self) -> pd.DataFrame:
        """Long format, one row per (epoch, hidden layer)."""
        epochs, layers = np.meshgrid(np.arange(1, self.n_epochs + 1), np.arange(1, self.n_hidden + 1),
                                     indexing='ij')
        df = pd.DataFrame({
            'epoch': epochs.ravel(),
            'layer': layers.ravel(),
            'signed_sum': self.signed_sums.ravel(),
            'l1_sum': self.l1_sums.ravel(),
            'alpha_signed': self.alpha_signed.ravel(),
            'alpha_l1': self.alpha_l1.ravel(),
            'beta_signed': self.beta_signed.ravel(),
            'beta_l1': self.beta_l1.ravel(),
        })
        df.insert(0, 'model_id', self.model_id)
        return df

    def save_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False, float_format='%.17g')


def _guarded_ratio(num: np.ndarray, den: np.ndarray, scale: np.ndarray):
    """num / den per epoch row; rows with |den| <= tol * scale become NaN."""
    undefined = np.abs(den) <= ZERO_TOLERANCE * np.maximum(scale, np.finfo(float).tiny)
    safe = np.where(undefined, 1.0, den)
    ratio = num / safe[:, None]
    ratio[undefined, :] = np.nan
    return ratio, undefined


def compute_layer_stats(trace: TrainTrace, model_id: int = 1,
                        n_hidden: Optional[int] = None) -> LayerStats:
    """
    Weight sums and alpha/beta ratios for every epoch of a trace.

    Args:
        trace: Trace with per-epoch per-layer weight sums
        model_id: Edge model index k, echoed in outputs
        n_hidden: Number of hidden layers (defaults to all layers but the output layer)

    Returns:
        LayerStats with both signed and L1 variants
    """
    signed = trace.signed_matrix()
    l1 = trace.l1_matrix()
    if signed.shape[0] == 0:
        raise ShapeError("Trace has no epochs with layer weight sums")
    n_hidden = signed.shape[1] - 1 if n_hidden is None else n_hidden
    if not 1 <= n_hidden <= signed.shape[1]:
        raise ShapeError(f"Trace has {signed.shape[1]} layers, cannot take {n_hidden} hidden layers")

    signed, l1 = signed[:, :n_hidden], l1[:, :n_hidden]
    total_signed, total_l1 = signed.sum(axis=1), l1.sum(axis=1)
    last_signed, last_l1 = signed[:, -1], l1[:, -1]

    alpha_signed, bad_alpha = _guarded_ratio(signed, total_signed, total_l1)
    beta_signed, bad_beta = _guarded_ratio(signed, last_signed, last_l1)
    alpha_l1, _ = _guarded_ratio(l1, total_l1, total_l1)
    beta_l1, _ = _guarded_ratio(l1, last_l1, last_l1)
    # Dividing a value by itself is exactly 1 in IEEE arithmetic; keep that explicit
    beta_signed[~bad_beta, -1] = 1.0
    beta_l1[np.isfinite(beta_l1[:, -1]), -1] = 1.0

    undefined_alpha = [int(e) + 1 for e in np.flatnonzero(bad_alpha)]
    undefined_beta = [int(e) + 1 for e in np.flatnonzero(bad_beta)]
    if undefined_alpha or undefined_beta:
        logger.warning(f"Model {model_id}: signed ratios undefined at epochs "
                       f"alpha={undefined_alpha} beta={undefined_beta}")

    return LayerStats(
        model_id=model_id,
        signed_sums=signed, l1_sums=l1,
        total_signed=total_signed, total_l1=total_l1,
        last_signed=last_signed, last_l1=last_l1,
        alpha_signed=alpha_signed, alpha_l1=alpha_l1,
        beta_signed=beta_signed, beta_l1=beta_l1,
        undefined_alpha_epochs=undefined_alpha,
        undefined_beta_epochs=undefined_beta,
    )
