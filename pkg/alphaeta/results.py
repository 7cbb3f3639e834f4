"""
Results Export

Curve CSV plus a JSON metadata sidecar, written sidecar-first and removed
together on failure. Floats use the shortest round-trip representation.
"""

import json
import logging
import math
import re
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from . import __version__
from .config import RESULT_COLUMNS, SIDECAR_SUFFIX, STATISTIC_DEFINITIONS, SWEEP_INDEX_FILE
from .errors import ResultsParseError
from .experiment import CurveAggregate

logger = logging.getLogger(__name__)

INTEGER_COLUMNS = ("q",)
BOOLEAN_COLUMNS = ("estimate_in_domain",)


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.stem + SIDECAR_SUFFIX)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [_json_value(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def _frame_to_json(frame: pd.DataFrame) -> Dict[str, List]:
    return {column: _json_value(frame[column].to_numpy()) for column in frame.columns}


def write_results(agg: CurveAggregate, path: Union[str, Path]) -> Path:
    """
    Write the curve CSV and its metadata sidecar

    Args:
        agg: Aggregated ensemble
        path: CSV destination; the sidecar goes next to it

    Returns:
        Path of the CSV file
    """
    path = Path(path)
    meta_path = sidecar_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    metadata = {
        "library_version": __version__,
        "generated_at": datetime.now().isoformat(),
        "wall_clock_seconds": agg.diagnostics.get("wall_clock_seconds"),
        "config": agg.config,
        "statistic_definitions": STATISTIC_DEFINITIONS,
        "diagnostics": _json_value(agg.diagnostics),
        "secondary": _frame_to_json(agg.secondary),
    }

    try:
        with open(meta_path, "w", encoding="utf-8") as f:
            json.dump(metadata, f, indent=2, ensure_ascii=False, allow_nan=False)
        agg.table[RESULT_COLUMNS].to_csv(path, index=False, lineterminator="\n")
    except BaseException:
        path.unlink(missing_ok=True)
        meta_path.unlink(missing_ok=True)
        raise

    logger.info(f"Wrote {path} and {meta_path.name}")
    return path


def _parse_cell(raw, column: str, path: Path, line: int):
    if not isinstance(raw, str) or raw == "":
        raise ResultsParseError(str(path), line, f"missing value in column {column!r}")
    if column in BOOLEAN_COLUMNS:
        if raw not in ("True", "False"):
            raise ResultsParseError(str(path), line, f"expected True/False in column {column!r}, got {raw!r}")
        return raw == "True"
    try:
        if column in INTEGER_COLUMNS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ResultsParseError(str(path), line, f"non-numeric value {raw!r} in column {column!r}")


def read_results(path: Union[str, Path]) -> CurveAggregate:
    """
    Read a curve CSV (and its sidecar, when present) back into a CurveAggregate

    Raises:
        ResultsParseError: Malformed CSV, naming the offending line
    """
    path = Path(path)
    if not path.is_file():
        raise ResultsParseError(str(path), None, "file not found")
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise ResultsParseError(str(path), 1, "empty file")
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise ResultsParseError(str(path), int(match.group(1)) if match else None, str(e))

    if list(raw.columns) != RESULT_COLUMNS:
        raise ResultsParseError(str(path), 1, f"unexpected header {','.join(raw.columns)}")

    columns = {column: [] for column in RESULT_COLUMNS}
    for i, row in enumerate(raw.itertuples(index=False), start=2):
        for column, cell in zip(RESULT_COLUMNS, row):
            columns[column].append(_parse_cell(cell, column, path, i))

    table = pd.DataFrame(columns)
    table["q"] = table["q"].astype(np.int64)
    table["estimate_in_domain"] = table["estimate_in_domain"].astype(bool)

    config: Dict = {}
    diagnostics: Dict = {}
    secondary = pd.DataFrame({"q": table["q"]})
    meta_path = sidecar_path(path)
    if meta_path.is_file():
        try:
            with open(meta_path, "r", encoding="utf-8") as f:
                metadata = json.load(f)
        except json.JSONDecodeError as e:
            raise ResultsParseError(str(meta_path), e.lineno, e.msg)
        config = metadata.get("config", {})
        diagnostics = metadata.get("diagnostics", {})
        if metadata.get("secondary"):
            secondary = pd.DataFrame(metadata["secondary"], dtype=float)
    else:
        logger.warning(f"No metadata sidecar next to {path}")

    return CurveAggregate(table=table, secondary=secondary, config=config, diagnostics=diagnostics)


def write_sweep_index(out_dir: Union[str, Path], parameter: str, rows: List[Dict],
                      filename: Optional[str] = None) -> Path:
    """
    Index of a sweep, keyed by the swept value

    Args:
        out_dir: Sweep directory
        parameter: Swept field name (first column header)
        rows: One dict per value with value, results, final_mean_entropy, final_mean_prob_correct
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index_path = out_dir / (filename or SWEEP_INDEX_FILE)
    frame = pd.DataFrame(rows, columns=["value", "results", "final_mean_entropy", "final_mean_prob_correct"])
    frame = frame.rename(columns={"value": parameter})
    frame.to_csv(index_path, index=False, lineterminator="\n")
    logger.info(f"Wrote sweep index {index_path} ({len(frame)} runs)")
    return index_path
