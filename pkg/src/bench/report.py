"""
Write a ComparisonReport to disk: report.json, report.csv, summary.csv,
detection.csv, plotdata.csv and a manifest whose digest depends only on
seeds, config and results.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from src.bench.experiment import ComparisonReport
from src.utils.errors import SerializationError
from src.utils.helpers import load_json, save_json

logger = logging.getLogger(__name__)

FORMATS = ('json', 'csv', 'plotdata')
REPORT_JSON = 'report.json'
REPORT_CSV = 'report.csv'
PLOTDATA_CSV = 'plotdata.csv'
SUMMARY_CSV = 'summary.csv'
DETECTION_CSV = 'detection.csv'
MANIFEST_JSON = 'manifest.json'


def report_digest(report: ComparisonReport) -> str:
    """SHA-256 of the report without wall-clock fields."""
    payload = json.dumps(report.to_dict(deterministic=True), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


def build_manifest(report: ComparisonReport, inputs: Optional[Dict[str, str]] = None) -> Dict:
    return {
        'digest': report_digest(report),
        'seeds': list(report.seeds),
        'criterion': report.criterion,
        'inputs': dict(inputs or {}),
        'dataset_hashes': report.hashes,
        'versions': report.versions,
        'failures': report.failures,
    }


def emit_report(report: ComparisonReport, out_dir: str, formats: Iterable[str] = FORMATS,
                inputs: Optional[Dict[str, str]] = None) -> List[Path]:
    """
    Write the requested report files and the manifest into ``out_dir``.

    Args:
        report: Comparison results
        out_dir: Output directory (created if missing)
        formats: Any of 'json', 'csv' (per-run rows, summary and pooled detection), 'plotdata'
        inputs: Input file paths to record in the manifest

    Returns:
        Paths written
    """
    formats = list(formats)
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise SerializationError(f"Unknown report formats {unknown}; use any of {FORMATS}")
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if 'json' in formats:
            save_json(report.to_dict(), str(out / REPORT_JSON))
            written.append(out / REPORT_JSON)
        if 'csv' in formats:
            report.to_frame().to_csv(out / REPORT_CSV, index=False, float_format='%.17g')
            report.summary().to_csv(out / SUMMARY_CSV, index=False)
            report.detection().to_csv(out / DETECTION_CSV, index=False)
            written.extend([out / REPORT_CSV, out / SUMMARY_CSV, out / DETECTION_CSV])
        if 'plotdata' in formats:
            report.plotdata().to_csv(out / PLOTDATA_CSV, index=False, float_format='%.17g')
            written.append(out / PLOTDATA_CSV)
        save_json(build_manifest(report, inputs), str(out / MANIFEST_JSON))
        written.append(out / MANIFEST_JSON)
    except OSError as e:
        raise SerializationError(f"Could not write report to {out}: {e}") from e

    logger.info(f"Report written to {out} ({', '.join(p.name for p in written)})")
    return written


def load_report(path: str) -> ComparisonReport:
    """Read report.json (or the directory holding it)."""
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_JSON
    if not path.exists():
        raise SerializationError(f"Report not found: {path}")
    try:
        return ComparisonReport.from_dict(load_json(str(path)))
    except (KeyError, TypeError, ValueError) as e:
        raise SerializationError(f"Malformed report {path}: {e}") from e
