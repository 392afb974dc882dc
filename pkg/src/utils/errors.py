"""
Exception hierarchy shared by all packages.

Every error raised on purpose derives from ``SLSError`` so the CLI can map it
to exit code 1; value-type problems also derive from ``ValueError``.
"""
from typing import Optional


class SLSError(Exception):
    """Base class for expected, user-facing failures."""


class ConfigurationError(SLSError, ValueError):
    """Invalid hyperparameters, shapes or config file content."""


class ShapeError(SLSError, ValueError):
    """Array or layer dimensions do not line up."""

    def __init__(self, message: str, layer: Optional[int] = None):
        super().__init__(message)
        self.layer = layer


class StaleCacheError(SLSError, RuntimeError):
    """A forward cache was used after the network it came from was mutated."""


class DivergedError(SLSError, RuntimeError):
    """Training produced a NaN or infinite loss."""

    def __init__(self, message: str, epoch: Optional[int] = None, edge: Optional[int] = None,
                 round_index: Optional[int] = None, client: Optional[int] = None):
        super().__init__(message)
        self.epoch = epoch
        self.edge = edge
        self.round_index = round_index
        self.client = client


class SchemaError(SLSError, ValueError):
    """CSV schema references columns the file does not have."""


class EmptyDatasetError(SLSError, ValueError):
    """No usable rows remain."""


class NonFiniteDataError(SLSError, ValueError):
    """Feature values are NaN or infinite."""


class PartitionError(SLSError, ValueError):
    """Not enough rows to carve the requested edge blocks."""


class SelectionError(SLSError, ValueError):
    """A layer-selection policy selected nothing or referenced a missing layer."""


class SynthesisError(SLSError, ValueError):
    """A synthesis plan cannot be realized against the trained edges."""


class LeakageError(SLSError, ValueError):
    """Central fine-tune data overlaps edge training rows."""


class CalibrationError(SLSError, ValueError):
    """Threshold calibration inputs are insufficient."""


class SerializationError(SLSError, ValueError):
    """A model or report file is malformed or has an unknown version."""
