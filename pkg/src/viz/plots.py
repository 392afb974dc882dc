"""
Plotting functions for training traces, layer analysis and benchmark results.

All functions accept an optional ax parameter for subplot integration.
"""
from typing import Optional, Sequence

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from matplotlib.axes import Axes

from src.analytics.layer_stats import LayerStats
from src.federated.fedavg import FLTrace
from src.nn.training import TrainTrace


def plot_loss_curves(traces: Sequence[TrainTrace], labels: Optional[Sequence[str]] = None,
                     ax: Optional[Axes] = None, log_scale: bool = True, **kwargs) -> Axes:
    """
    Training (dashed) and validation (solid) RMSE per epoch for several runs.

    Args:
        traces: Training traces to overlay
        labels: Legend label per trace (default "run 1", "run 2", ...)
        ax: Optional matplotlib axes object
        log_scale: Use a logarithmic y axis
        **kwargs: Additional arguments passed to plot()

    Returns:
        Matplotlib axes object
    """
    if ax is None:
        fig, ax = plt.subplots(figsize=(10, 6))
    labels = list(labels or [f"run {i + 1}" for i in range(len(traces))])

    for trace, label, color in zip(traces, labels, plt.cm.tab10.colors * 10):
        epochs = np.arange(1, trace.n_epochs + 1)
        ax.plot(epochs, trace.val_rmse, color=color, label=f"{label} (val)", **kwargs)
        ax.plot(epochs, trace.train_rmse, color=color, linestyle='--', alpha=0.6,
                label=f"{label} (train)", **kwargs)

    if log_scale:
        ax.set_yscale('log')
    ax.set_xlabel('Epoch', fontsize=12)
    ax.set_ylabel('RMSE', fontsize=12)
    ax.set_title('Reconstruction Loss per Epoch', fontsize=14, fontweight='bold')
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return ax


def plot_layer_sums(stats: LayerStats, variant: str = 'l1', ax: Optional[Axes] = None) -> Axes:
    """Per-epoch weight sum of every hidden layer of one edge model."""
    if ax is None:
        fig, ax = plt.subplots(figsize=(10, 6))
    sums = stats.l1_sums if variant == 'l1' else stats.signed_sums
    epochs = np.arange(1, stats.n_epochs + 1)
    for l in range(stats.n_hidden):
        ax.plot(epochs, sums[:, l], marker='o', markersize=3, label=f"layer {l + 1}")
    ax.set_xlabel('Epoch', fontsize=12)
    ax.set_ylabel(f'Weight sum ({variant})', fontsize=12)
    ax.set_title(f'Layer Weight Sums, Model {stats.model_id}', fontsize=14, fontweight='bold')
    ax.legend(fontsize=8, ncol=2)
    ax.grid(True, alpha=0.3)
    return ax


def plot_ratios(stats: LayerStats, kind: str = 'alpha', variant: str = 'l1',
                ax: Optional[Axes] = None) -> Axes:
    """
    Alpha (share of the epoch total) or beta (relative to the last hidden
    layer) per layer and epoch. Undefined epochs show as gaps.
    """
    if ax is None:
        fig, ax = plt.subplots(figsize=(10, 6))
    values = stats.alpha(variant) if kind == 'alpha' else stats.beta(variant)
    epochs = np.arange(1, stats.n_epochs + 1)
    for l in range(stats.n_hidden):
        ax.plot(epochs, values[:, l], label=f"layer {l + 1}")
    ax.set_xlabel('Epoch', fontsize=12)
    ax.set_ylabel(f'{kind} ({variant})', fontsize=12)
    ax.set_title(f'Layer {kind.capitalize()} Ratios, Model {stats.model_id}', fontsize=14, fontweight='bold')
    ax.legend(fontsize=8, ncol=2)
    ax.grid(True, alpha=0.3)
    return ax


def plot_fl_rounds(trace: FLTrace, ax: Optional[Axes] = None) -> Axes:
    """Global validation loss per round with every client's local loss."""
    if ax is None:
        fig, ax = plt.subplots(figsize=(10, 6))
    df = trace.to_frame(include_seconds=False)
    ax.plot(df['round'], df['global_val_loss'], color='black', linewidth=2, label='global (val)')
    for column in [c for c in df.columns if c.startswith('client_')]:
        ax.plot(df['round'], df[column], alpha=0.5, label=column.replace('_', ' '))
    ax.set_xlabel('Round', fontsize=12)
    ax.set_ylabel('RMSE', fontsize=12)
    ax.set_title(f'FedAvg: {trace.clients} Clients, {trace.local_epochs} Local Epochs',
                 fontsize=14, fontweight='bold')
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return ax


def plot_convergence_bars(summary: pd.DataFrame, metric: str = 'epochs_to_converge',
                          ax: Optional[Axes] = None) -> Axes:
    """
    Median of ``metric`` per arm with IQR error bars when available.

    Args:
        summary: Output of ComparisonReport.summary()
        metric: Base metric name (``<metric>_median`` must be a column)
        ax: Optional matplotlib axes object

    Returns:
        Matplotlib axes object
    """
    if ax is None:
        fig, ax = plt.subplots(figsize=(10, 6))
    df = summary.dropna(subset=[f'{metric}_median'])
    labels = [f"{arm}\n{name}" for arm, name in zip(df['arm'], df['name'])]
    errors = df[f'{metric}_iqr'].fillna(0).values / 2 if f'{metric}_iqr' in df else None
    colors = {'synthesized': 'steelblue', 'fresh_central': 'lightgray', 'fl': 'indianred'}

    bars = ax.bar(range(len(df)), df[f'{metric}_median'], yerr=errors, capsize=4,
                  color=[colors.get(a, 'gray') for a in df['arm']], edgecolor='black', linewidth=0.5)
    for bar, value in zip(bars, df[f'{metric}_median']):
        ax.text(bar.get_x() + bar.get_width() / 2, bar.get_height(), f"{value:.3g}",
                ha='center', va='bottom', fontsize=9)

    ax.set_xticks(range(len(df)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel(metric.replace('_', ' '), fontsize=12)
    ax.set_title('Median per Arm', fontsize=14, fontweight='bold')
    ax.grid(True, alpha=0.3, axis='y')
    return ax
