import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt
import pandas as pd
import pytest

from src.analytics.layer_stats import compute_layer_stats
from src.viz.plots import plot_convergence_bars, plot_fl_rounds, plot_layer_sums, plot_loss_curves, plot_ratios


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close('all')


def test_loss_curves(trained_edges):
    ax = plot_loss_curves(trained_edges.traces, labels=['edge 1', 'edge 2'])
    assert len(ax.get_lines()) == 4
    assert ax.get_yscale() == 'log'


def test_layer_plots(trained_edges):
    stats = compute_layer_stats(trained_edges.traces[0], 1)
    assert len(plot_layer_sums(stats).get_lines()) == stats.n_hidden
    fig, ax = plt.subplots()
    assert plot_ratios(stats, kind='beta', ax=ax) is ax


def test_fl_rounds(partition):
    from src.federated.config import FLConfig
    from src.federated.fedavg import fl_run

    trace, _ = fl_run(partition, FLConfig(clients=2, rounds=2, local_epochs=1, edge_lr=0.05, hidden=[3]))
    assert len(plot_fl_rounds(trace).get_lines()) == 3


def test_convergence_bars_skip_missing_medians():
    summary = pd.DataFrame({
        'arm': ['synthesized', 'fresh_central', 'fl'],
        'name': ['top2', '6-6-4-6', 'fedavg'],
        'epochs_to_converge_median': [4.0, 9.0, None],
        'epochs_to_converge_iqr': [1.0, 2.0, None],
    })
    ax = plot_convergence_bars(summary)
    assert len(ax.patches) == 2
