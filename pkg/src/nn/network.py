"""
Dense layers, networks, initialization and forward propagation.

Weights are stored ``out_dim x in_dim`` and a layer computes
``act(x @ W.T + b)`` on a row-major batch. All arithmetic is float64.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from src.nn.config import ACTIVATIONS, TrainConfig
from src.utils.errors import ConfigurationError, ShapeError
from src.utils.helpers import hash_arrays


@dataclass(frozen=True)
class LayerOrigin:
    """
    Provenance tag of a layer's parameters.

    kind is ``fresh`` (initialized here), ``edge`` (copied verbatim from
    layer ``sources[0][1]`` of edge model ``sources[0][0]``), ``widened``
    (block-diagonal composition of several edge layers) or ``averaged``
    (edge output layers side by side, scaled to their mean).
    """
    kind: str = 'fresh'
    sources: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def fresh(cls) -> 'LayerOrigin':
        return cls('fresh', ())

    @classmethod
    def edge(cls, model_id: int, layer_index: int) -> 'LayerOrigin':
        return cls('edge', ((int(model_id), int(layer_index)),))

    @classmethod
    def widened(cls, sources: Sequence[Tuple[int, int]]) -> 'LayerOrigin':
        return cls('widened', tuple((int(k), int(i)) for k, i in sources))

    @classmethod
    def averaged(cls, sources: Sequence[Tuple[int, int]]) -> 'LayerOrigin':
        return cls('averaged', tuple((int(k), int(i)) for k, i in sources))

    @property
    def is_copied(self) -> bool:
        return self.kind != 'fresh'

    def tag(self) -> str:
        if self.kind == 'fresh':
            return 'fresh'
        refs = '+'.join(f"{k}:{i}" for k, i in self.sources)
        return f"{self.kind}({refs})"

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'sources': [list(s) for s in self.sources]}

    @classmethod
    def from_dict(cls, data: dict) -> 'LayerOrigin':
        return cls(data.get('kind', 'fresh'), tuple(tuple(s) for s in data.get('sources', [])))


@dataclass
class DenseLayer:
    weights: np.ndarray
    biases: np.ndarray
    activation: str = 'identity'
    origin: LayerOrigin = field(default_factory=LayerOrigin.fresh)

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64, order='C')
        self.biases = np.array(self.biases, dtype=np.float64)
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"Unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise ShapeError(
                f"Layer weights {self.weights.shape} and biases {self.biases.shape} are inconsistent"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def n_params(self) -> int:
        return self.weights.size + self.biases.size

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.weights).all() and np.isfinite(self.biases).all())

    def param_hash(self) -> str:
        """Hash of weights and biases; equal hashes mean bit-identical parameters."""
        return hash_arrays([self.weights, self.biases])

    def copy(self, origin: Optional[LayerOrigin] = None) -> 'DenseLayer':
        return DenseLayer(self.weights.copy(), self.biases.copy(), self.activation,
                          self.origin if origin is None else origin)


class Network:
    """
    Ordered list of dense layers.

    ``version`` increases every time parameters are updated through the
    optimizers (or ``touch()``); forward caches remember the version they
    were produced at.
    """

    def __init__(self, layers: Sequence[DenseLayer]):
        self.layers: List[DenseLayer] = list(layers)
        self.version = 0
        self.validate()

    def validate(self) -> None:
        if not self.layers:
            raise ShapeError("A network needs at least one layer")
        for t in range(len(self.layers) - 1):
            if self.layers[t].out_dim != self.layers[t + 1].in_dim:
                raise ShapeError(
                    f"Layer {t + 2} expects {self.layers[t + 1].in_dim} inputs but layer {t + 1} "
                    f"produces {self.layers[t].out_dim}",
                    layer=t + 2,
                )

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def shape(self) -> List[int]:
        return [self.layers[0].in_dim] + [layer.out_dim for layer in self.layers]

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def code_size(self) -> int:
        """Width of the innermost (narrowest hidden) layer."""
        hidden = [layer.out_dim for layer in self.layers[:-1]]
        return min(hidden) if hidden else self.output_dim

    @property
    def is_autoencoder(self) -> bool:
        return self.input_dim == self.output_dim

    @property
    def n_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    def parameters(self) -> List[np.ndarray]:
        """Flat list [W1, b1, W2, b2, ...] of the live parameter arrays."""
        params = []
        for layer in self.layers:
            params.extend([layer.weights, layer.biases])
        return params

    def touch(self) -> None:
        """Mark parameters as changed, invalidating outstanding forward caches."""
        self.version += 1

    def copy(self) -> 'Network':
        return Network([layer.copy() for layer in self.layers])

    def param_hash(self) -> str:
        return hash_arrays(self.parameters())

    def __repr__(self) -> str:
        return f"Network(shape={self.shape}, params={self.n_params})"


def autoencoder_shape(n_features: int, hidden: Sequence[int]) -> List[int]:
    """Full width list ``[n_features, *hidden, n_features]``."""
    return [int(n_features)] + [int(w) for w in hidden] + [int(n_features)]


def validate_shape(shape: Sequence[int]) -> List[int]:
    """
    Check a width list; raise ConfigurationError if it is not usable.

    Args:
        shape: Layer widths including input and output

    Returns:
        The widths as a list of ints
    """
    if shape is None or len(shape) < 3:
        raise ConfigurationError(f"A network shape needs at least 3 widths, got {shape!r}")
    widths = []
    for width in shape:
        if isinstance(width, bool) or int(width) != width or int(width) <= 0:
            raise ConfigurationError(f"Layer widths must be positive integers, got {shape!r}")
        widths.append(int(width))
    return widths


def init_weights(rng: np.random.Generator, in_dim: int, out_dim: int, scheme: str) -> np.ndarray:
    """
    Draw an ``out_dim x in_dim`` weight matrix.

    ``uniform_pm1`` draws from U[-1, 1]; ``uniform_scaled`` from
    U[-1/sqrt(in_dim), 1/sqrt(in_dim)].
    """
    if scheme == 'uniform_pm1':
        bound = 1.0
    elif scheme == 'uniform_scaled':
        bound = 1.0 / np.sqrt(in_dim)
    else:
        raise ConfigurationError(f"Unknown init scheme {scheme!r}")
    return rng.uniform(-bound, bound, size=(out_dim, in_dim))


def init_network(shape: Sequence[int], activation: Optional[str] = None,
                 config: Optional[TrainConfig] = None) -> Network:
    """
    Create a freshly initialized network.

    Hidden layers use ``activation`` (default ``config.activation``), the last
    layer uses ``config.output_activation``. Biases start at exactly 0.

    Args:
        shape: Widths including input and output, at least 3 entries
        activation: Hidden activation override
        config: Supplies seed, init scheme and output activation

    Returns:
        Network with every origin tagged fresh
    """
    config = config or TrainConfig()
    widths = validate_shape(shape)
    activation = activation or config.activation
    if activation not in ACTIVATIONS:
        raise ConfigurationError(f"Unknown activation {activation!r}")

    rng = np.random.default_rng(config.seed)
    layers = []
    for t, (in_dim, out_dim) in enumerate(zip(widths[:-1], widths[1:])):
        is_last = t == len(widths) - 2
        layers.append(DenseLayer(
            weights=init_weights(rng, in_dim, out_dim, config.init),
            biases=np.zeros(out_dim),
            activation=config.output_activation if is_last else activation,
        ))
    return Network(layers)


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == 'relu':
        return np.maximum(z, 0.0)
    if name == 'sigmoid':
        return expit(z)
    if name == 'tanh':
        return np.tanh(z)
    return z


def activation_derivative(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """d act / d z, expressed through the pre-activation ``z`` and output ``a``."""
    if name == 'relu':
        return (z > 0).astype(np.float64)
    if name == 'sigmoid':
        return a * (1.0 - a)
    if name == 'tanh':
        return 1.0 - a * a
    return np.ones_like(z)


@dataclass
class ForwardCache:
    """Per-layer inputs, pre-activations and outputs of one forward call."""
    inputs: List[np.ndarray]
    pre: List[np.ndarray]
    post: List[np.ndarray]
    network_id: int
    version: int


def _as_batch(batch: np.ndarray, expected: int) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != expected:
        raise ShapeError(f"Layer 1 expects {expected} input columns, got array of shape {x.shape}", layer=1)
    return x


def forward(net: Network, batch: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Propagate a batch through the network.

    Args:
        net: Network to evaluate
        batch: Matrix with one row per instance

    Returns:
        (outputs, cache) where cache holds what backward() needs
    """
    net.validate()
    a = _as_batch(batch, net.input_dim)
    inputs, pre, post = [], [], []
    for layer in net.layers:
        inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        a = activate(layer.activation, z)
        pre.append(z)
        post.append(a)
    return a, ForwardCache(inputs, pre, post, id(net), net.version)


def predict(net: Network, batch: np.ndarray) -> np.ndarray:
    """Forward pass without keeping the cache."""
    a = _as_batch(batch, net.input_dim)
    for layer in net.layers:
        a = activate(layer.activation, a @ layer.weights.T + layer.biases)
    return a
