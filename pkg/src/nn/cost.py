"""
Analytic operation counts for dense networks.

For a network with n layers of width n, forward propagation over a batch
of n samples costs n_layers * n^3 multiplications, O(n^4) overall; adding
activation evaluation O(n^2), the backward pass O(n^4) and n gradient
descent steps bounds one training run at O(n^5).
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.nn.network import Network, activate, validate_shape

ASYMPTOTIC_EXPONENT = 5


@dataclass(frozen=True)
class CostEstimate:
    """
    Operation counts for one epoch over ``n_samples`` rows.

    ``mult_forward_per_sample`` is exact (sum of out*in over layers).
    ``uniform_closed_form`` is n_layers * n^3 when every width equals n,
    i.e. the exact forward count for a batch of n samples; None otherwise.
    Backward is counted as two products per weight per sample (error
    propagation and weight gradient).
    """
    shape: Tuple[int, ...]
    n_samples: int
    mult_forward_per_sample: int
    activation_ops: int
    backward_ops: int
    uniform_closed_form: Optional[int]
    asymptotic_exponent: int = ASYMPTOTIC_EXPONENT

    @property
    def mult_forward_total(self) -> int:
        return self.mult_forward_per_sample * self.n_samples

    @property
    def per_epoch_ops(self) -> int:
        return self.mult_forward_total + self.activation_ops + self.backward_ops

    def to_dict(self) -> dict:
        return {
            'shape': list(self.shape),
            'n_samples': self.n_samples,
            'mult_forward_per_sample': self.mult_forward_per_sample,
            'mult_forward_total': self.mult_forward_total,
            'activation_ops': self.activation_ops,
            'backward_ops': self.backward_ops,
            'per_epoch_ops': self.per_epoch_ops,
            'uniform_closed_form': self.uniform_closed_form,
            'asymptotic_exponent': self.asymptotic_exponent,
        }


def uniform_forward_mults(n_layers: int, width: int) -> int:
    """n_layers * n^3."""
    return int(n_layers) * int(width) ** 3


def estimate_cost(shape: Sequence[int], n_samples: int = 1) -> CostEstimate:
    """
    Count the operations of one training epoch.

    Args:
        shape: Widths including input and output
        n_samples: Rows processed per epoch

    Returns:
        CostEstimate
    """
    widths = validate_shape(shape)
    pairs = list(zip(widths[:-1], widths[1:]))
    per_sample = sum(out * inp for inp, out in pairs)
    n_samples = int(n_samples)
    closed_form = uniform_forward_mults(len(pairs), widths[0]) if len(set(widths)) == 1 else None
    return CostEstimate(
        shape=tuple(widths),
        n_samples=n_samples,
        mult_forward_per_sample=per_sample,
        activation_ops=sum(out for _, out in pairs) * n_samples,
        backward_ops=2 * per_sample * n_samples,
        uniform_closed_form=closed_form,
    )


def counted_forward(net: Network, batch: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Forward pass with explicit scalar loops, counting every multiplication.

    Slow; meant for small networks when checking estimate_cost.

    Returns:
        (outputs, number of multiplications performed)
    """
    rows = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    count = 0
    out_rows = []
    for row in rows:
        a = list(row)
        for layer in net.layers:
            z = []
            for j in range(layer.out_dim):
                acc = 0.0
                for i in range(layer.in_dim):
                    acc += layer.weights[j, i] * a[i]
                    count += 1
                z.append(acc + layer.biases[j])
            a = list(activate(layer.activation, np.array(z)))
        out_rows.append(a)
    return np.array(out_rows), count
