"""
Dataset ingestion, normalization, splitting, edge partitioning and the
synthetic flow-metadata generator.
"""
from .dataset import Dataset, SplitPair, EdgePartition, NormalizationRecord
from .cleaner import FlowSchema, FlowDataCleaner, ingest_csv
from .preprocessing import (
    fit_normalization,
    normalize,
    apply_normalization,
    split_80_20,
    partition_edges,
)
from .synthetic import (
    SynthConfig,
    generate_synthetic,
    save_dataset,
    load_manifest,
    apply_edge_jitter,
)

__all__ = [
    'Dataset',
    'SplitPair',
    'EdgePartition',
    'NormalizationRecord',
    'FlowSchema',
    'FlowDataCleaner',
    'ingest_csv',
    'fit_normalization',
    'normalize',
    'apply_normalization',
    'split_80_20',
    'partition_edges',
    'SynthConfig',
    'generate_synthetic',
    'save_dataset',
    'load_manifest',
    'apply_edge_jitter',
]
