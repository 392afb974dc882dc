"""Full-size benchmark runs on config/acceptance.yaml (select with -m slow)."""
import numpy as np
import pytest

from src.analytics.layer_stats import compute_layer_stats
from src.analytics.ranking import contribution_score
from src.bench.experiment import ExperimentConfig, prepare_partition, run_comparison
from src.edge.trainer import train_edges
from src.nn.network import autoencoder_shape
from src.utils.helpers import load_config

pytestmark = pytest.mark.slow

ACCEPTANCE = 'config/acceptance.yaml'


def acceptance(**overrides):
    return ExperimentConfig.from_config(load_config(ACCEPTANCE), **overrides)


@pytest.fixture(scope="module")
def central_report():
    cfg = acceptance(arms=('synthesized', 'fresh_central'))
    assert len(cfg.seeds) >= 10
    return run_comparison(cfg)


def _medians(report, arm):
    summary = report.summary()
    rows = summary[summary['arm'] == arm]
    return dict(zip(rows['name'], rows['epochs_to_converge_median']))


def test_first_hidden_layer_changes_more_than_the_last():
    cfg = acceptance()
    first, last = [], []
    for seed in range(10):
        partition = prepare_partition(cfg, seed)
        edges = train_edges(partition, autoencoder_shape(partition.central.train.n_features, [60] * 4),
                            cfg.training.replace(seed=seed, epochs=40), train_normal_only=True)
        scores = contribution_score(compute_layer_stats(edges.traces[0], 1), cfg.variant, cfg.rule).scores
        first.append(scores[0])
        last.append(scores[-1])
    assert np.median(first) > np.median(last)


def test_synthesized_model_converges_faster_than_fresh(central_report):
    assert not central_report.failed
    cfg = central_report.config
    assert cfg['m'] == 2 and cfg['edge_hidden'] == [60] * 7 and cfg['s_train'] >= 2000
    row = central_report.improvements().set_index('plan').loc['all']
    assert row['fresh_epochs'] is not None and np.isfinite(row['fresh_epochs'])
    assert row['synth_epochs'] <= 0.8 * row['fresh_epochs']


def test_plans_differ_and_all_layers_is_not_alone_at_the_bottom(central_report):
    medians = _medians(central_report, 'synthesized')
    assert set(medians) == {'all', 'top3'}
    values = list(medians.values())
    assert len(set(values)) >= 2
    worst = max(values)
    assert not (medians['all'] == worst and values.count(worst) == 1)


def test_detection_on_three_sigma_attacks(central_report):
    runs = [r for r in central_report.results if r.arm == 'synthesized' and r.name == 'all']
    assert len(runs) >= 10
    assert np.median([r.accuracy for r in runs]) >= 0.95
    assert np.median([r.fpr for r in runs]) <= 0.02
    pooled = central_report.detection().set_index(['arm', 'name']).loc[('synthesized', 'all')]
    assert pooled['runs'] == len(runs)


def test_synthesis_beats_fedavg_on_compute_and_bytes():
    base = acceptance()
    cfg = acceptance(seeds=list(range(5)), arms=('synthesized', 'fl'), plans=base.plans[:1])
    report = run_comparison(cfg)
    assert not report.failed
    for seed in cfg.seeds:
        synth = next(r for r in report.results if r.seed == seed and r.arm == 'synthesized')
        fl = next(r for r in report.results if r.seed == seed and r.arm == 'fl')
        assert synth.shape == fl.shape and len(synth.shape) == 9
        assert synth.converged
        fl_compute = fl.compute_to_converge if fl.converged else fl.compute_total
        assert synth.compute_to_converge < fl_compute
        assert synth.bytes_exchanged < fl.bytes_exchanged
