"""
Reconstruction-error intrusion detection: scoring, threshold calibration
and confusion-count reports.
"""
from .detector import (
    Threshold,
    DetectionReport,
    score,
    calibrate,
    classify,
    parse_method,
    micro_average,
    macro_average,
    reports_frame,
)

__all__ = [
    'Threshold',
    'DetectionReport',
    'score',
    'calibrate',
    'classify',
    'parse_method',
    'micro_average',
    'macro_average',
    'reports_frame',
]
