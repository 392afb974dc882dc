"""
Versioned flat-file model format.

Layout (all integers little-endian):

    magic        4 bytes   b"SLSN"
    version      uint16    currently 1
    header_len   uint32    length of the JSON header in bytes
    header       UTF-8 JSON: format, version, shape, layers (in_dim, out_dim,
                 activation, origin), seed, config, extra
    parameters   for each layer: weights (out_dim*in_dim, row-major) then
                 biases (out_dim), as float64 little-endian

Loading reproduces every parameter bit for bit.
"""
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.nn.network import DenseLayer, LayerOrigin, Network
from src.utils.errors import SerializationError

logger = logging.getLogger(__name__)

MAGIC = b"SLSN"
FORMAT_VERSION = 1
_PREFIX = struct.Struct('<4sHI')
_FLOAT = np.dtype('<f8')


def save_network(net: Network, path: str, seed: Optional[int] = None,
                 config: Optional[Dict[str, Any]] = None,
                 extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write a network to ``path``.

    Args:
        net: Network to save
        path: Output file
        seed: Seed echoed into the header
        config: Training config echoed into the header
        extra: Any other JSON-serializable metadata

    Returns:
        Path written
    """
    header = {
        'format': 'sls-network',
        'version': FORMAT_VERSION,
        'shape': net.shape,
        'layers': [
            {
                'in_dim': layer.in_dim,
                'out_dim': layer.out_dim,
                'activation': layer.activation,
                'origin': layer.origin.to_dict(),
            }
            for layer in net.layers
        ],
        'seed': seed,
        'config': config or {},
        'extra': extra or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf-8')
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for layer in net.layers:
            f.write(np.ascontiguousarray(layer.weights, dtype=_FLOAT).tobytes())
            f.write(np.ascontiguousarray(layer.biases, dtype=_FLOAT).tobytes())
    logger.info(f"Saved network {net.shape} to {path}")
    return path


def load_network(path: str) -> Tuple[Network, Dict[str, Any]]:
    """
    Read a network written by save_network().

    Returns:
        (network, header dict)
    """
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise SerializationError(f"{path} is too short to be a model file")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise SerializationError(f"{path} is not a model file (bad magic {magic!r})")
    if version != FORMAT_VERSION:
        raise SerializationError(f"{path} has unsupported format version {version}")
    offset = _PREFIX.size
    try:
        header = json.loads(data[offset:offset + header_len].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SerializationError(f"{path} has a corrupt header: {e}") from e
    offset += header_len

    layers = []
    for spec in header['layers']:
        n_w = spec['out_dim'] * spec['in_dim']
        n_b = spec['out_dim']
        needed = (n_w + n_b) * _FLOAT.itemsize
        if offset + needed > len(data):
            raise SerializationError(f"{path} is truncated")
        weights = np.frombuffer(data, dtype=_FLOAT, count=n_w, offset=offset)
        offset += n_w * _FLOAT.itemsize
        biases = np.frombuffer(data, dtype=_FLOAT, count=n_b, offset=offset)
        offset += n_b * _FLOAT.itemsize
        layers.append(DenseLayer(
            weights=weights.reshape(spec['out_dim'], spec['in_dim']).astype(np.float64),
            biases=biases.astype(np.float64),
            activation=spec['activation'],
            origin=LayerOrigin.from_dict(spec['origin']),
        ))
    if offset != len(data):
        raise SerializationError(f"{path} has {len(data) - offset} trailing bytes")
    return Network(layers), header
