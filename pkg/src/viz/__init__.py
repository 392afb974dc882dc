"""
Visualization module for training traces, layer analysis and comparisons.

Provides modular plotting functions using Matplotlib.
"""
from .plots import (
    plot_loss_curves,
    plot_layer_sums,
    plot_ratios,
    plot_fl_rounds,
    plot_convergence_bars
)

__all__ = [
    'plot_loss_curves',
    'plot_layer_sums',
    'plot_ratios',
    'plot_fl_rounds',
    'plot_convergence_bars'
]
