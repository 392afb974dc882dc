"""
Federated averaging baseline.
"""
from .config import FLConfig, PRESETS, BYTES_PER_PARAM
from .fedavg import (
    FLTrace,
    fl_broadcast,
    fl_local_update,
    fl_aggregate,
    fl_run,
    local_seed,
    server_update,
)

__all__ = [
    'FLConfig',
    'PRESETS',
    'BYTES_PER_PARAM',
    'FLTrace',
    'fl_broadcast',
    'fl_local_update',
    'fl_aggregate',
    'fl_run',
    'local_seed',
    'server_update',
]
