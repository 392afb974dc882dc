import numpy as np
import pytest

from src.detection.detector import (
    DetectionReport,
    Threshold,
    calibrate,
    classify,
    macro_average,
    micro_average,
    parse_method,
    reports_frame,
    score,
)
from src.nn.network import DenseLayer, Network
from src.utils.errors import CalibrationError, ConfigurationError


def test_identity_model_scores_zero(rng):
    net = Network([DenseLayer(np.eye(3), np.zeros(3))])
    np.testing.assert_array_equal(score(net, rng.normal(size=(4, 3))), 0.0)


def test_score_per_row():
    net = Network([DenseLayer(np.zeros((2, 2)), np.zeros(2))])
    np.testing.assert_allclose(score(net, np.array([[3.0, 4.0], [1.0, 1.0]])), [np.sqrt(12.5), 1.0])


def test_percentile_nearest_rank():
    scores = np.arange(1, 101, dtype=float)
    threshold = calibrate(scores, 'percentile:0.99')
    assert threshold.value == 99.0
    assert threshold.describe() == 'percentile(0.99)'
    assert calibrate(scores, 'percentile:1.0').value == 100.0


def test_percentile_needs_twenty_scores():
    with pytest.raises(CalibrationError):
        calibrate(np.arange(19, dtype=float), 'percentile:0.99')


def test_max_normal():
    assert calibrate(np.array([1.0, 5.0, 3.0]), 'max_normal').value == 5.0


def test_roc_opt_separates_classes():
    scores = np.array([0.1, 0.2, 0.3, 0.8, 0.9])
    labels = np.array([0, 0, 0, 1, 1])
    threshold = calibrate(scores, 'roc_opt', labels)
    assert threshold.value == 0.3
    report = classify(scores, threshold, labels)
    assert (report.tp, report.fp) == (2, 0)


def test_roc_opt_needs_both_classes():
    with pytest.raises(CalibrationError):
        calibrate(np.ones(5), 'roc_opt', np.zeros(5))
    with pytest.raises(CalibrationError):
        calibrate(np.ones(5), 'roc_opt')


@pytest.mark.parametrize('spec', ['median', 'percentile:0', 'percentile:1.5'])
def test_bad_method(spec):
    with pytest.raises(ConfigurationError):
        parse_method(spec)


def test_parse_defaults():
    assert parse_method('percentile') == {'method': 'percentile', 'p': 0.99}


def test_score_equal_to_threshold_is_normal():
    predicted = classify(np.array([1.0, 2.0, 3.0]), 2.0)
    np.testing.assert_array_equal(predicted, [0, 0, 1])


def test_infinite_threshold_flags_nothing():
    report = classify(np.array([1e9, 5.0, 0.0]), np.inf, np.array([1, 0, 0]))
    assert report.tp == 0 and report.fp == 0
    assert report.precision is None
    assert report.fpr == 0.0


def test_nan_threshold_rejected():
    with pytest.raises(ConfigurationError):
        classify(np.array([1.0]), float('nan'))


def test_confusion_counts():
    scores = np.array([0.1, 0.9, 0.8, 0.2, 0.7])
    labels = np.array([0, 1, 0, 1, 1])
    report = classify(scores, Threshold(0.5, 'max_normal'), labels)
    assert (report.tp, report.fn, report.fp, report.tn) == (2, 1, 1, 1)
    assert report.method == 'max_normal'


@pytest.mark.parametrize('counts, accuracy', [((200, 0, 19, 355), 96.69), ((188, 0, 0, 511), 100.0)])
def test_accuracy_table_rows(counts, accuracy):
    row = DetectionReport(*counts).table_row()
    assert row['accuracy_pct'] == accuracy
    assert row['total'] == sum(counts)


def test_averages():
    reports = [DetectionReport(1, 1, 0, 2), DetectionReport(3, 0, 1, 0)]
    pooled = micro_average(reports)
    assert (pooled.tp, pooled.fn, pooled.fp, pooled.tn) == (4, 1, 1, 2)
    macro = macro_average(reports)
    assert macro['accuracy'] == pytest.approx((0.75 + 0.75) / 2)
    assert macro['precision'] == pytest.approx((1.0 + 0.75) / 2)
    assert macro['fpr'] == pytest.approx((0.0 + 1.0) / 2)


def test_reports_frame_numbering():
    df = reports_frame([DetectionReport(1, 0, 0, 1), DetectionReport(0, 1, 1, 0)])
    assert df['run'].tolist() == [1, 2]
    assert df['accuracy_pct'].tolist() == [100.0, 0.0]


def test_report_roundtrip():
    report = DetectionReport(3, 1, 2, 4, threshold=0.5, method='roc_opt')
    assert DetectionReport.from_dict(report.to_dict()) == report


def test_increasing_transform_keeps_predictions():
    scores = np.array([0.1, 0.5, 2.0, 3.0, 10.0])
    labels = np.array([0, 0, 1, 1, 1])
    plain = classify(scores, 2.0, labels)
    warped = classify(np.log1p(scores), np.log1p(2.0), labels)
    assert (plain.tp, plain.fn, plain.fp, plain.tn) == (warped.tp, warped.fn, warped.fp, warped.tn)
