"""
Shared utilities: configuration, logging, hashing, seeds and errors.
"""
from .helpers import (
    load_config,
    load_json,
    save_json,
    deep_update,
    derive_seed,
    hash_arrays,
    hash_file,
    package_versions,
    setup_logging,
)
from .errors import (
    SLSError,
    ConfigurationError,
    ShapeError,
    StaleCacheError,
    DivergedError,
    SchemaError,
    EmptyDatasetError,
    NonFiniteDataError,
    PartitionError,
    SelectionError,
    SynthesisError,
    LeakageError,
    CalibrationError,
    SerializationError,
)

__all__ = [
    'load_config',
    'load_json',
    'save_json',
    'deep_update',
    'derive_seed',
    'hash_arrays',
    'hash_file',
    'package_versions',
    'setup_logging',
    'SLSError',
    'ConfigurationError',
    'ShapeError',
    'StaleCacheError',
    'DivergedError',
    'SchemaError',
    'EmptyDatasetError',
    'NonFiniteDataError',
    'PartitionError',
    'SelectionError',
    'SynthesisError',
    'LeakageError',
    'CalibrationError',
    'SerializationError',
]
