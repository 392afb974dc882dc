"""
Benchmark harness: convergence measurement, paired arm comparison, reports.
"""
from .convergence import ConvergenceCriterion, epochs_to_converge
from .experiment import (
    ARMS,
    ArmResult,
    ComparisonReport,
    ExperimentConfig,
    load_dataset,
    prepare_partition,
    run_comparison,
    run_seed,
    shape_label,
)
from .report import build_manifest, emit_report, load_report, report_digest

__all__ = [
    'ConvergenceCriterion',
    'epochs_to_converge',
    'ARMS',
    'ArmResult',
    'ComparisonReport',
    'ExperimentConfig',
    'load_dataset',
    'prepare_partition',
    'run_comparison',
    'run_seed',
    'shape_label',
    'build_manifest',
    'emit_report',
    'load_report',
    'report_digest',
]
