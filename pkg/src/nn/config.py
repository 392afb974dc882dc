"""
Training hyperparameters for the dense network engine.

Defaults follow the DNN hyperparameter table the method was tuned with:
Adam decay rates 0.8 / 0.9, L2 factor 1e-8, sparsity 0.2 (recorded only),
learning rate 0.005.
"""
from dataclasses import dataclass, asdict, fields, replace
from typing import Any, Dict, Optional

from src.utils.errors import ConfigurationError

ACTIVATIONS = ('relu', 'sigmoid', 'tanh', 'identity')
INIT_SCHEMES = ('uniform_pm1', 'uniform_scaled')
OPTIMIZERS = ('adam', 'sgd')


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters for one training run.

    ``sparsity`` is parsed and echoed into traces and model headers but no
    penalty is derived from it. ``batch_size`` of 0 or None means full batch.
    """
    epochs: int = 40
    learning_rate: float = 0.005
    beta1: float = 0.8
    beta2: float = 0.9
    epsilon: float = 1e-8
    l2_lambda: float = 1e-8
    sparsity: float = 0.2
    batch_size: Optional[int] = 32
    seed: int = 0
    init: str = 'uniform_pm1'
    activation: str = 'tanh'
    output_activation: str = 'identity'
    optimizer: str = 'adam'
    regularize_bias: bool = False
    progress: bool = False

    def validate(self) -> 'TrainConfig':
        """
        Check ranges; raise ConfigurationError on the first violation.

        Returns:
            self, so calls can be chained
        """
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigurationError(f"epochs must be an integer >= 1, got {self.epochs!r}")
        if not 0.0 < self.beta1 < 1.0:
            raise ConfigurationError(f"beta1 must lie in (0, 1), got {self.beta1}")
        if not 0.0 < self.beta2 < 1.0:
            raise ConfigurationError(f"beta2 must lie in (0, 1), got {self.beta2}")
        if self.l2_lambda < 0:
            raise ConfigurationError(f"l2_lambda must be >= 0, got {self.l2_lambda}")
        if self.learning_rate < 0:
            raise ConfigurationError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.batch_size is not None and self.batch_size < 0:
            raise ConfigurationError(f"batch_size must be positive (or 0 for full batch), got {self.batch_size}")
        if self.init not in INIT_SCHEMES:
            raise ConfigurationError(f"init must be one of {INIT_SCHEMES}, got {self.init!r}")
        for name in ('activation', 'output_activation'):
            if getattr(self, name) not in ACTIVATIONS:
                raise ConfigurationError(f"{name} must be one of {ACTIVATIONS}, got {getattr(self, name)!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        return self

    @property
    def full_batch(self) -> bool:
        return not self.batch_size

    def replace(self, **changes: Any) -> 'TrainConfig':
        """Copy with changes applied (not validated; call validate() where needed)."""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], **overrides: Any) -> 'TrainConfig':
        """
        Build from the ``training`` section of the YAML config.

        Args:
            data: Mapping of field names to values; unknown keys are rejected
            **overrides: Values that win over ``data`` (e.g. CLI flags); None is ignored

        Returns:
            TrainConfig (not yet validated)
        """
        known = {f.name for f in fields(cls)}
        merged = dict(data or {})
        if 'lambda' in merged:
            merged['l2_lambda'] = merged.pop('lambda')
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigurationError(f"Unknown training options: {unknown}")
        for key in ('learning_rate', 'beta1', 'beta2', 'epsilon', 'l2_lambda', 'sparsity'):
            if key in merged:
                merged[key] = float(merged[key])
        for key in ('epochs', 'seed'):
            if key in merged:
                merged[key] = int(merged[key])
        return cls(**merged)
