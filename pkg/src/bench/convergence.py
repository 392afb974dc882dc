"""
Epochs-to-converge relative to a run's own best validation loss.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from src.utils.errors import ConfigurationError, ShapeError

METRICS = ('val_rmse',)


@dataclass(frozen=True)
class ConvergenceCriterion:
    delta: float = 0.05
    patience: int = 3
    metric: str = 'val_rmse'

    def validate(self) -> 'ConvergenceCriterion':
        if not self.delta > 0:
            raise ConfigurationError(f"delta must be > 0, got {self.delta}")
        if not isinstance(self.patience, int) or self.patience < 1:
            raise ConfigurationError(f"patience must be an integer >= 1, got {self.patience!r}")
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], **overrides: Any) -> 'ConvergenceCriterion':
        merged = dict(data or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(merged) - {'delta', 'patience', 'metric'})
        if unknown:
            raise ConfigurationError(f"Unknown convergence options: {unknown}")
        if 'delta' in merged:
            merged['delta'] = float(merged['delta'])
        if 'patience' in merged:
            merged['patience'] = int(merged['patience'])
        return cls(**merged).validate()


def epochs_to_converge(trace: Union[Sequence[float], Any],
                       criterion: Optional[ConvergenceCriterion] = None) -> Optional[int]:
    """
    First epoch whose loss stays within (1 + delta) of the run minimum for
    ``patience`` consecutive epochs.

    The whole window has to lie inside the run. Non-finite losses never
    satisfy the bound.

    Args:
        trace: Loss sequence, or any trace with a ``val_rmse`` attribute
        criterion: Convergence definition (defaults: delta 0.05, patience 3)

    Returns:
        1-indexed epoch, or None when the run did not converge
    """
    criterion = (criterion or ConvergenceCriterion()).validate()
    losses = getattr(trace, criterion.metric, trace)
    losses = np.asarray(losses, dtype=np.float64).ravel()
    if losses.size == 0:
        raise ShapeError("Cannot measure convergence of an empty trace")
    finite = np.isfinite(losses)
    if not finite.any():
        return None

    bound = (1.0 + criterion.delta) * losses[finite].min()
    ok = finite & (losses <= bound)
    p = criterion.patience
    for start in range(losses.size - p + 1):
        if ok[start:start + p].all():
            return start + 1
    return None
