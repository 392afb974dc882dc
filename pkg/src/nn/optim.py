"""
Optimizers: Adam with bias correction, and plain SGD.

Both update the network's arrays in place and bump its version.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.nn.backprop import Gradients
from src.nn.config import TrainConfig
from src.nn.network import Network
from src.utils.errors import ShapeError


@dataclass
class AdamState:
    """First/second moment accumulators mirroring [W1, b1, W2, b2, ...]."""
    m: List[np.ndarray]
    v: List[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, net: Network) -> 'AdamState':
        params = net.parameters()
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)

    def copy(self) -> 'AdamState':
        return AdamState([a.copy() for a in self.m], [a.copy() for a in self.v], self.t)


def _check_shapes(params: List[np.ndarray], others: List[np.ndarray], what: str) -> None:
    if len(params) != len(others):
        raise ShapeError(f"{what} has {len(others)} arrays, network has {len(params)}")
    for idx, (p, o) in enumerate(zip(params, others)):
        if p.shape != o.shape:
            raise ShapeError(f"{what} array {idx} has shape {o.shape}, parameter has {p.shape}",
                             layer=idx // 2 + 1)


def adam_step(net: Network, grads: Gradients, state: AdamState,
              config: TrainConfig) -> Tuple[Network, AdamState]:
    """
    One Adam update.

        m <- b1 m + (1 - b1) g
        v <- b2 v + (1 - b2) g^2
        p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)

    Args:
        net: Network to update in place
        grads: Gradients from backward()
        state: Accumulators; updated in place
        config: Supplies learning_rate, beta1, beta2, epsilon

    Returns:
        (net, state)
    """
    params = net.parameters()
    grad_arrays = grads.arrays()
    _check_shapes(params, grad_arrays, "gradient")
    _check_shapes(params, state.m, "Adam state")

    state.t += 1
    b1, b2 = config.beta1, config.beta2
    correction1 = 1.0 - b1 ** state.t
    correction2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grad_arrays, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= config.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + config.epsilon)
    net.touch()
    return net, state


def sgd_step(net: Network, grads: Gradients, learning_rate: float) -> Network:
    """p <- p - lr * g for every parameter array."""
    params = net.parameters()
    grad_arrays = grads.arrays()
    _check_shapes(params, grad_arrays, "gradient")
    if learning_rate:
        for p, g in zip(params, grad_arrays):
            p -= learning_rate * g
    net.touch()
    return net
