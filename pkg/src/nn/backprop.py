"""
RMSE loss and its exact gradient with L2 regularization.

The loss is the batch-level RMSE, sqrt(mean over all elements of e^2), not a
per-sample MSE. Its derivative w.r.t. each output element is

    dL/do = e / (count * RMSE)

which is the chain factor 1 / (2 * RMSE * count) applied to d(e^2)/do = 2e.
At RMSE == 0 the derivative is taken as 0.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from src.nn.network import ForwardCache, Network, activation_derivative, predict
from src.utils.errors import ShapeError, StaleCacheError


@dataclass
class LayerGradient:
    weights: np.ndarray
    biases: np.ndarray


@dataclass
class Gradients:
    """Per-layer gradients plus the data loss they were computed at."""
    layers: List[LayerGradient]
    loss: float

    def arrays(self) -> List[np.ndarray]:
        out = []
        for g in self.layers:
            out.extend([g.weights, g.biases])
        return out


def rmse_loss(outputs: np.ndarray, targets: np.ndarray) -> float:
    """
    Root mean squared error over every element.

    Args:
        outputs: Network outputs
        targets: Targets of identical shape

    Returns:
        sqrt(mean((outputs - targets) ** 2))
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if outputs.shape != targets.shape:
        raise ShapeError(f"outputs {outputs.shape} and targets {targets.shape} differ in shape")
    return float(np.sqrt(np.mean((outputs - targets) ** 2)))


def l2_penalty(net: Network, l2_lambda: float, regularize_bias: bool = False) -> float:
    """(lambda / 2) * sum of squared weights, so its gradient is lambda * w."""
    if l2_lambda == 0:
        return 0.0
    total = sum(float(np.sum(layer.weights ** 2)) for layer in net.layers)
    if regularize_bias:
        total += sum(float(np.sum(layer.biases ** 2)) for layer in net.layers)
    return 0.5 * l2_lambda * total


def objective(net: Network, batch: np.ndarray, targets: np.ndarray,
              l2_lambda: float = 0.0, regularize_bias: bool = False) -> float:
    """Scalar training objective: RMSE + L2 penalty."""
    return rmse_loss(predict(net, batch), targets) + l2_penalty(net, l2_lambda, regularize_bias)


def backward(net: Network, cache: ForwardCache, targets: np.ndarray,
             l2_lambda: float = 0.0, regularize_bias: bool = False) -> Gradients:
    """
    Gradients of RMSE + (lambda/2)||W||^2 for every layer.

    Args:
        net: Network the cache was produced with, unchanged since
        cache: Result of forward(net, batch)
        targets: Targets with the output's shape
        l2_lambda: L2 factor; adds lambda * w to each weight gradient
        regularize_bias: Also penalize biases (used by the FL baseline)

    Returns:
        Gradients mirroring the parameter shapes
    """
    if cache.network_id != id(net) or cache.version != net.version or len(cache.pre) != net.depth:
        raise StaleCacheError(
            f"Forward cache is from version {cache.version} but network is at version {net.version}"
        )
    outputs = cache.post[-1]
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != outputs.shape:
        raise ShapeError(f"targets {targets.shape} do not match outputs {outputs.shape}")

    error = outputs - targets
    loss = float(np.sqrt(np.mean(error ** 2)))
    if loss > 0:
        grad_out = error / (error.size * loss)
    else:
        grad_out = np.zeros_like(error)

    grads: List[LayerGradient] = [None] * net.depth
    for t in range(net.depth - 1, -1, -1):
        layer = net.layers[t]
        delta = grad_out * activation_derivative(layer.activation, cache.pre[t], cache.post[t])
        grad_w = delta.T @ cache.inputs[t]
        grad_b = delta.sum(axis=0)
        if l2_lambda:
            grad_w = grad_w + l2_lambda * layer.weights
            if regularize_bias:
                grad_b = grad_b + l2_lambda * layer.biases
        grads[t] = LayerGradient(grad_w, grad_b)
        if t > 0:
            grad_out = delta @ layer.weights
    return Gradients(grads, loss)
