import json
from dataclasses import replace

import numpy as np
import pytest

from src.bench.convergence import ConvergenceCriterion
from src.bench.experiment import ARMS, ExperimentConfig, prepare_partition, run_comparison, run_seed
from src.bench.report import build_manifest, emit_report, load_report
from src.data.synthetic import SynthConfig
from src.federated.config import FLConfig
from src.nn.config import TrainConfig
from src.utils.errors import ConfigurationError, PartitionError, SerializationError
from src.utils.helpers import load_config


@pytest.fixture(scope="module")
def small_experiment():
    return ExperimentConfig(
        seeds=[0, 1],
        synthetic=SynthConfig(n_normal=400, n_attack=40, dim=6, latent_dim=3),
        m=2, s_train=100, s_test=20,
        edge_hidden=[5, 4, 4, 5],
        training=TrainConfig(epochs=4, learning_rate=0.01),
        fine_tune=TrainConfig(epochs=6, learning_rate=0.01),
        plans=[{'name': 'top2', 'policy': 'top_k_per_model:2'}],
        federated=FLConfig(rounds=3, local_epochs=1, edge_lr=0.05, central_lr=1.0),
        criterion=ConvergenceCriterion(delta=0.05, patience=2),
    )


@pytest.fixture(scope="module")
def report(small_experiment):
    return run_comparison(small_experiment)


def test_one_row_per_seed_and_arm(report):
    df = report.to_frame()
    assert len(df) == 2 * len(ARMS)
    assert sorted(df['arm'].unique()) == sorted(ARMS)
    assert not report.failed


def test_arms_share_the_partition(report):
    for seed in report.seeds:
        hashes = {r.partition_hash for r in report.results if r.seed == seed}
        assert len(hashes) == 1
    assert report.hashes['0'] != report.hashes['1']


def test_synthesized_and_fresh_share_a_shape(report):
    synth = [r for r in report.results if r.arm == 'synthesized']
    fresh = [r for r in report.results if r.arm == 'fresh_central']
    for s, f in zip(synth, fresh):
        assert s.shape == f.shape
        assert f.name == s.matched_fresh
        assert 0 < s.fraction_pretrained < 1
        assert s.bytes_exchanged == round(s.fraction_pretrained * s.n_params) * 8


def test_fl_costs(report, small_experiment):
    for r in (r for r in report.results if r.arm == 'fl'):
        assert r.epochs_run == 3
        assert r.bytes_exchanged == 2 * r.n_params * small_experiment.m * 8 * 3
        assert r.cost_per_epoch > 0


def test_plotdata_matches_curves(report):
    plot = report.plotdata()
    for r in report.results:
        rows = plot[(plot['seed'] == r.seed) & (plot['arm'] == r.arm) & (plot['name'] == r.name)]
        np.testing.assert_array_equal(rows['val_rmse'].to_numpy(), r.val_curve)
        assert rows['epoch'].tolist() == list(range(1, r.epochs_run + 1))


def test_summary_has_iqr_with_several_seeds(report):
    summary = report.summary()
    assert 'epochs_to_converge_iqr' in summary.columns
    assert summary['runs'].tolist() == [2, 2, 2]


def test_single_seed_summary_has_no_iqr(small_experiment):
    single = run_comparison(replace(small_experiment, seeds=[3]))
    summary = single.summary()
    assert not [c for c in summary.columns if c.endswith('_iqr')]
    assert summary['epochs_to_converge_median'].notna().any()


def test_improvements_table(report):
    table = report.improvements()
    assert table['plan'].tolist() == ['top2']
    assert table['fl_bytes'].iloc[0] > 0


def test_emitted_report_reads_back(tmp_path, report):
    written = emit_report(report, tmp_path / 'out')
    assert {p.name for p in written} == {'report.json', 'report.csv', 'summary.csv', 'detection.csv', 'plotdata.csv',
                                         'manifest.json'}
    loaded = load_report(tmp_path / 'out')
    assert loaded.to_dict(deterministic=True) == report.to_dict(deterministic=True)
    manifest = json.loads((tmp_path / 'out' / 'manifest.json').read_text())
    assert manifest['digest'] == build_manifest(report)['digest']
    assert manifest['seeds'] == [0, 1]


def test_detection_pools_confusion_counts_over_seeds(report):
    table = report.detection().set_index(['arm', 'name'])
    assert len(table) == 3
    for (arm, name), row in table.iterrows():
        runs = [r for r in report.results if (r.arm, r.name) == (arm, name) and r.detection]
        assert row['runs'] == len(runs) == 2
        assert row['total'] == sum(r.detection['total'] for r in runs)
        assert row['fp'] == sum(r.detection['fp'] for r in runs)
        assert row['accuracy_micro'] == pytest.approx((row['tp'] + row['tn']) / row['total'])
        assert row['accuracy_macro'] == pytest.approx(np.mean([r.accuracy for r in runs]))


def test_compute_total_covers_every_epoch_run(report):
    for r in report.results:
        assert r.compute_total >= r.cost_per_epoch * r.epochs_run
        if r.converged:
            assert r.compute_total >= r.compute_to_converge
        if r.arm != 'synthesized':
            assert r.compute_total == r.cost_per_epoch * r.epochs_run


def test_manifest_is_reproducible(small_experiment, report):
    again = run_comparison(small_experiment)
    assert build_manifest(again)['digest'] == build_manifest(report)['digest']


def test_parallel_seeds_match_serial(small_experiment, report):
    threaded = run_comparison(replace(small_experiment, parallel_seeds=True, parallel_edges=True))
    assert build_manifest(threaded)['digest'] == build_manifest(report)['digest']


def test_failed_arms_are_recorded(small_experiment):
    cfg = replace(small_experiment, seeds=[0], plans=[{'name': 'none', 'policy': 'threshold:99'}])
    results, _ = run_seed(cfg, 0)
    assert [r.arm for r in results] == ['synthesized', 'fresh_central', 'fl']
    assert all(r.failure for r in results)


def test_unknown_report_format(tmp_path, report):
    with pytest.raises(SerializationError):
        emit_report(report, tmp_path, formats=['xlsx'])


def test_load_report_missing(tmp_path):
    with pytest.raises(SerializationError):
        load_report(tmp_path)


def test_partition_needs_central_rows(small_experiment):
    with pytest.raises(PartitionError):
        prepare_partition(replace(small_experiment, s_train=176, s_test=44), seed=0)


def test_from_project_config():
    cfg = ExperimentConfig.from_config(load_config('config/config.yaml'), seeds=[4])
    assert cfg.seeds == [4]
    assert cfg.fine_tune.epochs == 40
    assert cfg.fine_tune.l2_lambda == 1e-8
    assert [p['name'] for p in cfg.plans] == ['all', 'top3']
    assert cfg.validate() is cfg


@pytest.mark.parametrize('changes', [{'seeds': []}, {'arms': ('fl', 'oracle')}, {'source': 'csv'},
                                     {'plans': [{'name': 'a'}, {'name': 'a'}]},
                                     {'detection_method': 'median'}])
def test_invalid_experiments(small_experiment, changes):
    with pytest.raises(ConfigurationError):
        replace(small_experiment, **changes).validate()


@pytest.mark.slow
def test_full_size_comparison():
    cfg = ExperimentConfig.from_config(load_config('config/config.yaml'), seeds=[0, 1, 2])
    report = run_comparison(cfg)
    assert not report.failed
    assert len(report.to_frame()) == 3 * (len(cfg.plans) * 2 + 1)
