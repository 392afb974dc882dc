"""
Deterministic dense neural-network engine.

- network: layers, initialization, forward propagation
- backprop: RMSE loss and gradients with L2
- optim: Adam and SGD steps
- training: training loop and TrainTrace
- cost: analytic operation counts
- gradcheck: finite-difference verification
- serialization: versioned model files
"""
from .config import TrainConfig, ACTIVATIONS, INIT_SCHEMES
from .network import (
    LayerOrigin,
    DenseLayer,
    Network,
    ForwardCache,
    autoencoder_shape,
    init_network,
    forward,
    predict,
)
from .backprop import Gradients, LayerGradient, rmse_loss, backward, objective
from .optim import AdamState, adam_step, sgd_step
from .training import TrainTrace, train, iterate_minibatches, shuffle_rng
from .cost import CostEstimate, estimate_cost, counted_forward, uniform_forward_mults
from .gradcheck import GradCheckResult, check_gradients
from .serialization import save_network, load_network

__all__ = [
    'TrainConfig',
    'ACTIVATIONS',
    'INIT_SCHEMES',
    'LayerOrigin',
    'DenseLayer',
    'Network',
    'ForwardCache',
    'autoencoder_shape',
    'init_network',
    'forward',
    'predict',
    'Gradients',
    'LayerGradient',
    'rmse_loss',
    'backward',
    'objective',
    'AdamState',
    'adam_step',
    'sgd_step',
    'TrainTrace',
    'train',
    'iterate_minibatches',
    'shuffle_rng',
    'CostEstimate',
    'estimate_cost',
    'counted_forward',
    'uniform_forward_mults',
    'GradCheckResult',
    'check_gradients',
    'save_network',
    'load_network',
]
