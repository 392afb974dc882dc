"""
Utility helper functions for the synthesized learning project.
"""
import yaml
import json
import hashlib
import logging
import sys
from pathlib import Path
from typing import Dict, Any, Iterable, Optional

import numpy as np


def load_config(config_path: str = "config/config.yaml") -> Dict[str, Any]:
    """
    Load configuration from YAML file.

    Args:
        config_path: Path to config.yaml file

    Returns:
        Dictionary containing configuration
    """
    with open(config_path, 'r') as f:
        return yaml.safe_load(f) or {}


def load_json(file_path: str) -> Dict[str, Any]:
    """
    Load JSON file.

    Args:
        file_path: Path to JSON file

    Returns:
        Dictionary containing JSON data
    """
    with open(file_path, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_json(data: Dict[str, Any], file_path: str) -> None:
    """
    Save data as JSON file.

    Keys are sorted so identical content always produces identical bytes.

    Args:
        data: Dictionary to save
        file_path: Path where to save the JSON file
    """
    Path(file_path).parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def deep_update(base: Dict[str, Any], overrides: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Recursively merge ``overrides`` into a copy of ``base``."""
    merged = dict(base)
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_update(merged[key], value)
        else:
            merged[key] = value
    return merged


def derive_seed(master_seed: int, *parts: int) -> int:
    """
    Derive a child seed from a master seed by XOR-ing in the given parts.

    ``derive_seed(s, k)`` is ``s ^ k``; further parts are shifted into
    higher bits so (round, client) pairs never collide.

    Args:
        master_seed: 64-bit master seed
        *parts: Non-negative integers identifying the child stream

    Returns:
        Derived 64-bit seed
    """
    seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
    for position, part in enumerate(parts):
        seed ^= (int(part) << (16 * position)) & 0xFFFFFFFFFFFFFFFF
    return seed


def hash_arrays(arrays: Iterable[np.ndarray]) -> str:
    """
    SHA-256 over the dtype, shape and raw bytes of a sequence of arrays.

    Args:
        arrays: Arrays to hash, in order

    Returns:
        Hex digest
    """
    digest = hashlib.sha256()
    for arr in arrays:
        arr = np.ascontiguousarray(arr)
        digest.update(str(arr.dtype).encode())
        digest.update(str(arr.shape).encode())
        digest.update(arr.tobytes())
    return digest.hexdigest()


def hash_file(file_path: str) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(file_path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def package_versions() -> Dict[str, str]:
    """Versions of the numerical stack, recorded in run manifests."""
    import pandas as pd
    import sklearn

    return {
        'python': sys.version.split()[0],
        'numpy': np.__version__,
        'pandas': pd.__version__,
        'scikit-learn': sklearn.__version__,
    }


def setup_logging(config_path: str = "config/config.yaml", module_name: str = None) -> logging.Logger:
    """
    Set up logging configuration from config file.

    Args:
        config_path: Path to config.yaml file
        module_name: Name of the module requesting logger

    Returns:
        Configured logger instance
    """

    # Get logger first
    logger = logging.getLogger(module_name or __name__)

    # Prevent propagation to root logger to avoid duplicate messages
    logger.propagate = False

    # Remove existing handlers so repeated CLI invocations in one process don't duplicate output
    if logger.handlers:
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)

    try:
        config = load_config(config_path)
        log_config = config.get('logging', {})
    except Exception:
        # Fallback if config fails
        log_config = {'level': 'INFO', 'log_to_console': True}

    # Set level
    level_str = log_config.get('level', 'INFO')
    level = getattr(logging, level_str.upper(), logging.INFO)
    logger.setLevel(level)

    # Module-specific levels apply to child loggers, e.g. "src.nn"
    module_levels = log_config.get('module_levels', {}) or {}
    for child, child_level in module_levels.items():
        name = child if child.startswith(logger.name) else f"{logger.name}.{child}"
        logging.getLogger(name).setLevel(getattr(logging, str(child_level).upper(), level))

    # Create formatter
    log_format = log_config.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    date_format = log_config.get('date_format', '%Y-%m-%d %H:%M:%S')
    formatter = logging.Formatter(log_format, datefmt=date_format)

    # Console handler
    if log_config.get('log_to_console', True):
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    # File handler
    if log_config.get('log_to_file', False):
        log_file = log_config.get('log_file', 'logs/sls.log')

        # Find project root (where config/ directory exists)
        current = Path.cwd()
        project_root = current

        # Search up the directory tree for config folder
        for parent in [current] + list(current.parents):
            if (parent / 'config').exists():
                project_root = parent
                break

        log_file_path = project_root / log_file

        try:
            log_file_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file_path, encoding='utf-8')
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError as e:
            logger.warning(f"Failed to setup file logging: {e}")

    return logger
