"""
Federated-averaging baseline configuration and the named model presets.

Defaults reproduce the published FedAvg set-up: four clients, 20 local
epochs per round, edge learning rate 1e-8, central learning rate 0.005 and
L2 factor 1e-4 on kernels and biases. The edge rate is far too small for
visible local progress; override it for experiments that must converge.
"""
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional

from src.nn.config import ACTIVATIONS, INIT_SCHEMES, OPTIMIZERS, TrainConfig
from src.nn.network import autoencoder_shape, validate_shape
from src.utils.errors import ConfigurationError

# Hidden widths of the 3-, 8- and 12-layer FedAvg models
PRESETS: Dict[str, List[int]] = {
    'fl3': [180, 180, 180],
    'fl8': [180, 90, 60, 30, 30, 60, 90, 180],
    'fl12': [180] * 12,
}

BYTES_PER_PARAM = 8


@dataclass(frozen=True)
class FLConfig:
    """
    ``shape`` is the full width list; ``hidden`` or ``preset`` give hidden
    widths instead and are resolved with ``resolve_shape(n_features)``.
    ``local_optimizer: adam`` is an ablation switch, plain SGD is the
    reference behaviour.
    """
    clients: int = 4
    rounds: int = 50
    local_epochs: int = 20
    edge_lr: float = 1e-8
    central_lr: float = 0.005
    l2_reg: float = 1e-4
    shape: Optional[List[int]] = None
    hidden: Optional[List[int]] = None
    preset: Optional[str] = None
    seed: int = 0
    local_optimizer: str = 'sgd'
    batch_size: Optional[int] = 32
    init: str = 'uniform_pm1'
    activation: str = 'tanh'
    output_activation: str = 'identity'
    regularize_bias: bool = True
    parallel: bool = False
    progress: bool = False

    def validate(self) -> 'FLConfig':
        for name in ('clients', 'rounds', 'local_epochs'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigurationError(f"{name} must be an integer >= 1, got {value!r}")
        if self.edge_lr < 0 or self.central_lr < 0:
            raise ConfigurationError(f"Learning rates must be >= 0, got {self.edge_lr} / {self.central_lr}")
        if self.l2_reg < 0:
            raise ConfigurationError(f"l2_reg must be >= 0, got {self.l2_reg}")
        if self.local_optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"local_optimizer must be one of {OPTIMIZERS}, got {self.local_optimizer!r}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigurationError(f"Unknown FL preset {self.preset!r}; use one of {sorted(PRESETS)}")
        if self.init not in INIT_SCHEMES:
            raise ConfigurationError(f"init must be one of {INIT_SCHEMES}, got {self.init!r}")
        for name in ('activation', 'output_activation'):
            if getattr(self, name) not in ACTIVATIONS:
                raise ConfigurationError(f"{name} must be one of {ACTIVATIONS}, got {getattr(self, name)!r}")
        if self.shape is not None:
            validate_shape(self.shape)
        return self

    def resolve_shape(self, n_features: int) -> List[int]:
        """Full width list for data with ``n_features`` columns."""
        if self.shape is not None:
            shape = validate_shape(self.shape)
            if shape[0] != n_features or shape[-1] != n_features:
                raise ConfigurationError(f"FL shape {shape} does not match {n_features} features")
            return shape
        if self.hidden is not None:
            return autoencoder_shape(n_features, self.hidden)
        return autoencoder_shape(n_features, PRESETS[self.preset or 'fl8'])

    def local_train_config(self, seed: int) -> TrainConfig:
        """Training config of one local update (seeded per round and client)."""
        return TrainConfig(
            epochs=self.local_epochs,
            learning_rate=self.edge_lr,
            l2_lambda=self.l2_reg,
            batch_size=self.batch_size,
            seed=seed,
            init=self.init,
            activation=self.activation,
            output_activation=self.output_activation,
            optimizer=self.local_optimizer,
            regularize_bias=self.regularize_bias,
        )

    def init_config(self) -> TrainConfig:
        return self.local_train_config(self.seed)

    def replace(self, **changes: Any) -> 'FLConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], **overrides: Any) -> 'FLConfig':
        """Build from the ``federated`` section of the YAML config; None overrides are ignored."""
        known = {f.name for f in fields(cls)}
        merged = dict(data or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigurationError(f"Unknown federated options: {unknown}")
        for key in ('edge_lr', 'central_lr', 'l2_reg'):
            if key in merged:
                merged[key] = float(merged[key])
        for key in ('clients', 'rounds', 'local_epochs', 'seed'):
            if key in merged:
                merged[key] = int(merged[key])
        for key in ('shape', 'hidden'):
            if merged.get(key) is not None:
                merged[key] = [int(w) for w in merged[key]]
        return cls(**merged)
