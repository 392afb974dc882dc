"""
Central finite-difference check of backward().
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from src.nn.backprop import backward, objective
from src.nn.network import Network, forward


@dataclass
class GradCheckResult:
    relative_errors: List[float]

    @property
    def max_relative_error(self) -> float:
        return max(self.relative_errors) if self.relative_errors else 0.0


def numeric_gradient(net: Network, batch: np.ndarray, targets: np.ndarray, param: np.ndarray,
                     l2_lambda: float = 0.0, step: float = 1e-5) -> np.ndarray:
    """Central differences of the objective w.r.t. one parameter array (restored afterwards)."""
    grad = np.zeros_like(param)
    it = np.nditer(param, flags=['multi_index'])
    for _ in it:
        idx = it.multi_index
        original = param[idx]
        param[idx] = original + step
        plus = objective(net, batch, targets, l2_lambda)
        param[idx] = original - step
        minus = objective(net, batch, targets, l2_lambda)
        param[idx] = original
        grad[idx] = (plus - minus) / (2.0 * step)
    return grad


def check_gradients(net: Network, batch: np.ndarray, targets: np.ndarray,
                    l2_lambda: float = 0.0, step: float = 1e-5) -> GradCheckResult:
    """
    Compare analytic and numeric gradients for every parameter array.

    The error per array is ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-12).

    Args:
        net: Network (left unchanged)
        batch: Input rows
        targets: Targets for the batch
        l2_lambda: L2 factor included in both gradients
        step: Finite-difference step

    Returns:
        GradCheckResult with one relative error per parameter array
    """
    _, cache = forward(net, batch)
    analytic = backward(net, cache, targets, l2_lambda).arrays()
    errors = []
    for param, grad in zip(net.parameters(), analytic):
        numeric = numeric_gradient(net, batch, targets, param, l2_lambda, step)
        denom = max(np.linalg.norm(grad) + np.linalg.norm(numeric), 1e-12)
        errors.append(float(np.linalg.norm(grad - numeric) / denom))
    return GradCheckResult(errors)
