"""
Reconstruction-error intrusion detection.

An autoencoder trained on normal flows reconstructs them with low RMSE;
tampered flows reconstruct poorly. A row is flagged as an attack when its
score is strictly greater than the threshold (ties count as normal).
"""
import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from src.nn.network import Network, predict
from src.utils.errors import CalibrationError, ConfigurationError

logger = logging.getLogger(__name__)

THRESHOLD_METHODS = ('percentile', 'max_normal', 'roc_opt')
MIN_PERCENTILE_SCORES = 20
DEFAULT_PERCENTILE = 0.99

# Column order of the attack-detection performance table
REPORT_COLUMNS = ['tp', 'fn', 'fp', 'tn', 'total', 'accuracy_pct']


def score(model: Network, instances: np.ndarray) -> np.ndarray:
    """
    Per-row reconstruction RMSE.

    Args:
        model: Autoencoder
        instances: Rows to score

    Returns:
        Vector of sqrt(mean_j (x_j - x_hat_j)^2), one per row
    """
    x = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    reconstruction = predict(model, x)
    return np.sqrt(np.mean((reconstruction - x) ** 2, axis=1))


@dataclass(frozen=True)
class Threshold:
    value: float
    method: str
    percentile: Optional[float] = None
    n_calibration: int = 0

    def to_dict(self) -> Dict:
        return asdict(self)

    def describe(self) -> str:
        if self.method == 'percentile':
            return f"percentile({self.percentile})"
        return self.method


def parse_method(spec: str) -> Dict:
    """
    Parse ``percentile:0.99``, ``percentile``, ``max_normal`` or ``roc_opt``.

    Returns:
        dict with ``method`` and optional ``p``
    """
    name, _, arg = str(spec).partition(':')
    name = name.strip()
    if name not in THRESHOLD_METHODS:
        raise ConfigurationError(f"Unknown threshold method {spec!r}; use one of {THRESHOLD_METHODS}")
    if name == 'percentile':
        p = float(arg) if arg else DEFAULT_PERCENTILE
        if not 0.0 < p <= 1.0:
            raise ConfigurationError(f"Percentile must lie in (0, 1], got {p}")
        return {'method': name, 'p': p}
    return {'method': name}


def calibrate(scores: np.ndarray, method: str = 'percentile:0.99',
              labels: Optional[np.ndarray] = None) -> Threshold:
    """
    Choose a decision threshold from calibration scores.

    percentile(p) takes the nearest-rank order statistic ceil(p*n);
    max_normal the largest score; roc_opt needs labels and maximizes
    Youden's J = TPR - FPR over every observed score (smallest such score wins).

    Args:
        scores: Calibration scores (normal-only for percentile / max_normal)
        method: Method spec, see parse_method()
        labels: Binary labels, required for roc_opt

    Returns:
        Threshold
    """
    parsed = parse_method(method)
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size == 0:
        raise CalibrationError("No calibration scores")

    if parsed['method'] == 'percentile':
        if s.size < MIN_PERCENTILE_SCORES:
            raise CalibrationError(f"Percentile calibration needs at least {MIN_PERCENTILE_SCORES} "
                                   f"scores, got {s.size}")
        rank = max(1, math.ceil(parsed['p'] * s.size - 1e-12))
        value = float(np.sort(s)[rank - 1])
        return Threshold(value, 'percentile', parsed['p'], int(s.size))

    if parsed['method'] == 'max_normal':
        return Threshold(float(s.max()), 'max_normal', None, int(s.size))

    if labels is None:
        raise CalibrationError("roc_opt calibration requires labels")
    y = np.asarray(labels).ravel()
    if y.shape != s.shape:
        raise CalibrationError(f"{y.size} labels for {s.size} scores")
    positives, negatives = int((y == 1).sum()), int((y == 0).sum())
    if positives == 0 or negatives == 0:
        raise CalibrationError("roc_opt needs both normal and attack examples")

    candidates = np.unique(s)
    # Rows above each candidate, via sorted scores per class
    pos_sorted, neg_sorted = np.sort(s[y == 1]), np.sort(s[y == 0])
    tp = positives - np.searchsorted(pos_sorted, candidates, side='right')
    fp = negatives - np.searchsorted(neg_sorted, candidates, side='right')
    youden = tp / positives - fp / negatives
    best = int(np.argmax(youden))
    logger.info(f"roc_opt threshold {candidates[best]:.6g} with J={youden[best]:.4f}")
    return Threshold(float(candidates[best]), 'roc_opt', None, int(s.size))


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class DetectionReport:
    """
    Confusion counts and derived metrics.

    Undefined ratios (zero denominators) are None.
    """
    tp: int
    fn: int
    fp: int
    tn: int
    threshold: Optional[float] = None
    method: Optional[str] = None

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self) -> Optional[float]:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def tpr(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def fpr(self) -> Optional[float]:
        return _ratio(self.fp, self.fp + self.tn)

    def to_dict(self) -> Dict:
        return {
            'tp': self.tp, 'fn': self.fn, 'fp': self.fp, 'tn': self.tn,
            'total': self.total,
            'accuracy': self.accuracy,
            'precision': self.precision,
            'tpr': self.tpr,
            'fpr': self.fpr,
            'threshold': self.threshold,
            'method': self.method,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table_row(self) -> Dict:
        """Counts and accuracy (%) in the detection-table column order."""
        accuracy = None if self.accuracy is None else round(100.0 * self.accuracy, 2)
        return dict(zip(REPORT_COLUMNS, [self.tp, self.fn, self.fp, self.tn, self.total, accuracy]))

    @classmethod
    def from_dict(cls, data: Dict) -> 'DetectionReport':
        return cls(int(data['tp']), int(data['fn']), int(data['fp']), int(data['tn']),
                   data.get('threshold'), data.get('method'))


def classify(scores: np.ndarray, threshold: Union[Threshold, float],
             labels: Optional[np.ndarray] = None) -> Union[DetectionReport, np.ndarray]:
    """
    Flag rows whose score is strictly greater than the threshold.

    Args:
        scores: Per-row scores
        threshold: Threshold or raw value (may be +inf)
        labels: Ground truth; when absent the predicted labels are returned

    Returns:
        DetectionReport with labels, otherwise a 0/1 prediction vector
    """
    value = threshold.value if isinstance(threshold, Threshold) else float(threshold)
    if math.isnan(value):
        raise ConfigurationError("Threshold must not be NaN")
    predicted = (np.asarray(scores, dtype=np.float64) > value).astype(np.int64)
    if labels is None:
        return predicted
    tn, fp, fn, tp = confusion_matrix(np.asarray(labels, dtype=np.int64), predicted, labels=[0, 1]).ravel()
    method = threshold.describe() if isinstance(threshold, Threshold) else None
    return DetectionReport(int(tp), int(fn), int(fp), int(tn), value, method)


def micro_average(reports: Sequence[DetectionReport]) -> DetectionReport:
    """Pool the confusion counts of several runs."""
    return DetectionReport(
        tp=sum(r.tp for r in reports), fn=sum(r.fn for r in reports),
        fp=sum(r.fp for r in reports), tn=sum(r.tn for r in reports),
        method='micro-average',
    )


def macro_average(reports: Sequence[DetectionReport]) -> Dict[str, Optional[float]]:
    """Mean of each defined per-run metric."""
    out = {}
    for metric in ('accuracy', 'precision', 'tpr', 'fpr'):
        values = [getattr(r, metric) for r in reports if getattr(r, metric) is not None]
        out[metric] = float(np.mean(values)) if values else None
    return out


def reports_frame(reports: Sequence[DetectionReport]) -> pd.DataFrame:
    """One table row per report, numbered from 1."""
    df = pd.DataFrame([r.table_row() for r in reports], columns=REPORT_COLUMNS)
    df.insert(0, 'run', range(1, len(df) + 1))
    return df
