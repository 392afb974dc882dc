import numpy as np
import pytest

from src.analytics.layer_stats import compute_layer_stats
from src.nn.training import TrainTrace
from src.utils.errors import ShapeError


def make_trace(signed_rows, l1_rows=None):
    """Trace with the given per-epoch layer sums (last column is the output layer)."""
    signed_rows = [np.asarray(r, dtype=float) for r in signed_rows]
    l1_rows = [np.abs(r) for r in signed_rows] if l1_rows is None else [np.asarray(r, dtype=float) for r in l1_rows]
    n_layers = len(signed_rows[0])
    trace = TrainTrace(shape=[3] * (n_layers + 1))
    trace.signed_sums, trace.l1_sums = signed_rows, l1_rows
    trace.train_rmse = [1.0] * len(signed_rows)
    trace.val_rmse = [1.0] * len(signed_rows)
    trace.seconds = [0.0] * len(signed_rows)
    return trace


def test_alpha_and_beta():
    stats = compute_layer_stats(make_trace([[2.0, 4.0, 9.0]]))
    assert stats.n_hidden == 2
    np.testing.assert_allclose(stats.alpha_l1[0], [1 / 3, 2 / 3])
    np.testing.assert_allclose(stats.beta_l1[0], [0.5, 1.0])
    assert stats.total_l1[0] == 6.0


def test_alpha_rows_sum_to_one(trained_edges):
    stats = compute_layer_stats(trained_edges.traces[0], model_id=1)
    np.testing.assert_allclose(stats.alpha_l1.sum(axis=1), 1.0, rtol=1e-12)
    assert np.all(stats.beta_l1[:, -1] == 1.0)
    assert stats.n_hidden == 4


def test_signed_variant_flags_vanishing_totals():
    stats = compute_layer_stats(make_trace([[1.0, -1.0, 0.0], [1.0, 3.0, 0.0]]))
    assert stats.undefined_alpha_epochs == [1]
    assert np.all(np.isnan(stats.alpha_signed[0]))
    np.testing.assert_allclose(stats.alpha_signed[1], [0.25, 0.75])
    np.testing.assert_allclose(stats.alpha_l1[0], [0.5, 0.5])


def test_signed_beta_undefined_when_last_layer_sum_is_zero():
    stats = compute_layer_stats(make_trace([[2.0, 0.0, 1.0]]))
    assert stats.undefined_beta_epochs == [1]
    assert np.all(np.isnan(stats.beta_signed[0]))


def test_explicit_hidden_count():
    stats = compute_layer_stats(make_trace([[1.0, 1.0, 2.0]]), n_hidden=3)
    np.testing.assert_allclose(stats.beta_l1[0], [0.5, 0.5, 1.0])


def test_empty_trace():
    with pytest.raises(ShapeError):
        compute_layer_stats(TrainTrace(shape=[3, 2, 3]))


def test_long_frame():
    df = compute_layer_stats(make_trace([[1.0, 2.0, 0.5], [2.0, 2.0, 0.5]]), model_id=4).to_frame()
    assert len(df) == 4
    assert df['model_id'].unique().tolist() == [4]
    assert df[['epoch', 'layer']].values.tolist() == [[1, 1], [1, 2], [2, 1], [2, 2]]
