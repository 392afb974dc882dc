"""
Flow-metadata CSV ingestion.

This module turns a raw CSV export into a Dataset:
- Checking the schema's columns exist
- Selecting feature and label columns
- Converting datatypes (unparseable values become NaN)
- Dropping rows with missing or non-finite selected values
- Mapping label values to 0 (normal) / 1 (attack)
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging

import numpy as np
import pandas as pd

from src.data.dataset import Dataset
from src.utils.errors import EmptyDatasetError, SchemaError
from src.utils.helpers import hash_file, load_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowSchema:
    """
    Which CSV columns to use and how to read labels.

    Label values found in ``label_mapping`` map to its value; any other
    value maps to ``default_label`` (rows are dropped when that is None).
    Without a mapping, numeric labels are read as ``value != 0``.
    """
    features: List[str]
    label_column: Optional[str] = None
    label_mapping: Dict[str, int] = field(default_factory=dict)
    default_label: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FlowSchema':
        features = data.get('features') or []
        if not features:
            raise SchemaError("Schema must list at least one feature column")
        mapping = {str(k).strip(): int(v) for k, v in (data.get('label_mapping') or {}).items()}
        default = data.get('default_label')
        return cls(
            features=[str(c) for c in features],
            label_column=data.get('label_column'),
            label_mapping=mapping,
            default_label=None if default is None else int(default),
        )

    @classmethod
    def from_yaml(cls, path: str) -> 'FlowSchema':
        return cls.from_dict(load_config(path))

    @classmethod
    def from_header(cls, csv_path: str, label_column: str = 'label') -> 'FlowSchema':
        """Every header column is a feature except ``label_column`` (used as labels when present)."""
        columns = [str(c) for c in pd.read_csv(csv_path, nrows=0).columns]
        label = label_column if label_column in columns else None
        return cls(features=[c for c in columns if c != label], label_column=label)


class FlowDataCleaner:
    """
    Handles ingestion and cleaning of flow-metadata CSV files.
    """

    def __init__(self, schema: FlowSchema, config: Optional[Dict[str, Any]] = None):
        """
        Initialize the cleaner.

        Args:
            schema: Columns to select and label handling
            config: Optional configuration dictionary
        """
        self.schema = schema
        self.config = config or {}
        self.malformed_lines = 0

    def load_raw_data(self, csv_path: str) -> pd.DataFrame:
        """
        Load a CSV with a header row; every cell is read as text.

        Args:
            csv_path: Path to the CSV file

        Returns:
            pd.DataFrame: Raw data
        """
        path = Path(csv_path)
        logger.info(f"Loading raw data from {path}")
        if not path.exists():
            raise FileNotFoundError(f"CSV file not found: {path}")
        bad_lines = []
        df = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True, engine="python",
            on_bad_lines=lambda line: bad_lines.append(line),
        )
        self.malformed_lines = len(bad_lines)
        logger.info(f"Initial DataFrame shape: {df.shape} ({self.malformed_lines} malformed lines skipped)")
        return df

    def check_schema(self, df: pd.DataFrame) -> None:
        """Raise SchemaError if any schema column is missing."""
        wanted = list(self.schema.features)
        if self.schema.label_column:
            wanted.append(self.schema.label_column)
        missing = [c for c in wanted if c not in df.columns]
        if missing:
            raise SchemaError(f"Columns missing from CSV: {missing}")

    def clean_datatypes(self, df: pd.DataFrame) -> pd.DataFrame:
        """
        Convert feature columns to float; unparseable and infinite values become NaN.

        Args:
            df (pd.DataFrame): Selected columns

        Returns:
            pd.DataFrame: DataFrame with numeric feature columns
        """
        df = df.copy()
        for col in self.schema.features:
            df[col] = pd.to_numeric(df[col].str.strip(), errors='coerce')
        df[self.schema.features] = df[self.schema.features].replace([np.inf, -np.inf], np.nan)
        return df

    def map_labels(self, df: pd.DataFrame) -> pd.DataFrame:
        """
        Add a ``_label`` column with 0/1 values (NaN when unmappable).

        Args:
            df (pd.DataFrame): Input dataframe

        Returns:
            pd.DataFrame: DataFrame with mapped labels
        """
        df = df.copy()
        col = self.schema.label_column
        raw = df[col].astype(str).str.strip()
        if self.schema.label_mapping:
            mapped = raw.map(self.schema.label_mapping).astype(float)
            if self.schema.default_label is not None:
                # Empty cells stay missing; unknown values take the default
                mapped = mapped.where(mapped.notna() | (raw == ''), float(self.schema.default_label))
        else:
            numeric = pd.to_numeric(raw, errors='coerce')
            mapped = (numeric != 0).astype(float).where(numeric.notna(), np.nan)
        df['_label'] = mapped
        return df

    def filter_data(self, df: pd.DataFrame) -> pd.DataFrame:
        """
        Drop rows with missing values in the selected columns.

        Args:
            df (pd.DataFrame): Input dataframe

        Returns:
            pd.DataFrame: Filtered dataframe
        """
        subset = list(self.schema.features) + (['_label'] if '_label' in df.columns else [])
        initial_len = len(df)
        df = df.dropna(subset=subset)
        logger.info(f"Rows removed: {initial_len - len(df)}")
        return df

    def clean_all(self, csv_path: str) -> Dataset:
        """
        Run the complete ingestion pipeline.

        Args:
            csv_path: Path to the CSV file

        Returns:
            Dataset with ``dropped_rows`` set to the number of rejected rows
        """
        logger.info("=" * 60)
        logger.info("Starting flow-metadata ingestion")
        logger.info("=" * 60)

        raw = self.load_raw_data(csv_path)
        self.check_schema(raw)

        columns = list(self.schema.features) + ([self.schema.label_column] if self.schema.label_column else [])
        df = raw[columns]
        df = self.clean_datatypes(df)
        if self.schema.label_column:
            df = self.map_labels(df)
        clean = self.filter_data(df)
        dropped = len(raw) - len(clean) + self.malformed_lines

        if clean.empty:
            raise EmptyDatasetError(f"No usable rows in {csv_path} ({dropped} dropped)")

        labels = clean['_label'].to_numpy(dtype=np.int64) if self.schema.label_column else None
        dataset = Dataset(
            features=clean[self.schema.features].to_numpy(dtype=np.float64),
            labels=labels,
            feature_names=tuple(self.schema.features),
            manifest={'source': str(csv_path), 'sha256': hash_file(csv_path)},
            dropped_rows=dropped,
        )
        logger.info(f"Ingested {dataset.n_rows} rows x {dataset.n_features} features; dropped {dropped}")
        return dataset


def ingest_csv(path: str, schema: FlowSchema) -> Dataset:
    """
    Read a flow-metadata CSV according to ``schema``.

    Args:
        path: CSV file with a header row
        schema: Feature columns, optional label column and mapping

    Returns:
        Dataset; ``dropped_rows`` counts rows rejected for bad values
    """
    return FlowDataCleaner(schema).clean_all(path)
