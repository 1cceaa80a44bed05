"""
Dataset CSV Tool

Reads and writes the AR dataset CSV:

    ar_id,class_label,multi_ar,t_index,<feature_1>,...,<feature_F>

plus the JSON split manifest and named feature subsets.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.models.dataset import (
    DEFAULT_FEATURES,
    LOS_FEATURES,
    SERIES_LENGTH,
    VECTOR_FEATURES,
    ARRecord,
    ClassLabel,
    CVSplit,
)
from src.models.features import FLUX_COLUMNS, GRADIENT_COLUMNS, WAVELET_COLUMNS
from src.utils.errors import DataError, IngestionError

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["ar_id", "class_label", "multi_ar", "t_index"]

FEATURE_SETS: Dict[str, List[str]] = {
    "all10": list(DEFAULT_FEATURES),
    "los2": list(LOS_FEATURES),
    "vector8": list(VECTOR_FEATURES),
    "gradient": list(GRADIENT_COLUMNS),
    "wavelet": list(WAVELET_COLUMNS),
    "flux": list(FLUX_COLUMNS),
}


def _line(row_index: int) -> int:
    # header is line 1
    return row_index + 2


def _parse_floats(column: pd.Series, ar_ids: pd.Series, name: str) -> np.ndarray:
    try:
        return np.array(column.tolist(), dtype=np.float64)
    except ValueError:
        for idx, cell in column.items():
            try:
                float(cell)
            except ValueError:
                raise IngestionError(
                    f"non-numeric value {cell!r} in column '{name}'",
                    ar_id=int(ar_ids[idx]),
                    line=_line(idx),
                ) from None
        raise


def load_csv(path: Union[str, Path]) -> List[ARRecord]:
    """
    Load AR records from a dataset CSV.

    Rows are grouped by ar_id (first-appearance order) and ordered by
    t_index; every AR must have exactly 40 rows.

    Raises:
        IngestionError: missing column, wrong row count or non-numeric cell,
            naming the offending AR and line.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"dataset not found: {path}")

    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")

    missing = [c for c in KEY_COLUMNS if c not in df.columns]
    if missing:
        raise IngestionError(f"{path.name}: missing column(s) {', '.join(missing)}")
    feature_names = [c for c in df.columns if c not in KEY_COLUMNS]
    if not feature_names:
        raise IngestionError(f"{path.name}: no feature columns")

    for idx, value in df["ar_id"].items():
        if not value.isdigit() or int(value) <= 0:
            raise IngestionError(f"invalid ar_id {value!r}", line=_line(idx))
    ar_ids = df["ar_id"].astype(int)

    labels = {c.value for c in ClassLabel}
    for idx, value in df["class_label"].items():
        if value not in labels:
            raise IngestionError(
                f"invalid class_label {value!r}", ar_id=int(ar_ids[idx]), line=_line(idx)
            )
    for idx, value in df["multi_ar"].items():
        if value not in ("0", "1"):
            raise IngestionError(
                f"multi_ar must be 0 or 1, got {value!r}", ar_id=int(ar_ids[idx]), line=_line(idx)
            )
    for idx, value in df["t_index"].items():
        if not value.isdigit() or int(value) >= SERIES_LENGTH:
            raise IngestionError(
                f"t_index must lie in 0..{SERIES_LENGTH - 1}, got {value!r}",
                ar_id=int(ar_ids[idx]),
                line=_line(idx),
            )

    values = np.column_stack([_parse_floats(df[name], ar_ids, name) for name in feature_names])
    t_index = df["t_index"].astype(int).to_numpy()

    id_column = ar_ids.to_numpy()
    records = []
    for ar_id in pd.unique(id_column):
        rows = np.flatnonzero(id_column == ar_id)
        first = _line(int(rows[0]))
        if len(rows) != SERIES_LENGTH:
            raise IngestionError(
                f"expected {SERIES_LENGTH} rows, found {len(rows)}", ar_id=int(ar_id), line=first
            )
        order = np.argsort(t_index[rows], kind="stable")
        rows = rows[order]
        if not np.array_equal(t_index[rows], np.arange(SERIES_LENGTH)):
            raise IngestionError(
                "t_index values are not 0..39 exactly once", ar_id=int(ar_id), line=first
            )
        if df["class_label"].iloc[rows].nunique() != 1 or df["multi_ar"].iloc[rows].nunique() != 1:
            raise IngestionError(
                "class_label/multi_ar differ between rows", ar_id=int(ar_id), line=first
            )
        try:
            records.append(
                ARRecord(
                    ar_id=int(ar_id),
                    class_label=df["class_label"].iloc[rows[0]],
                    multi_ar=df["multi_ar"].iloc[rows[0]] == "1",
                    feature_names=feature_names,
                    series=values[rows],
                )
            )
        except ValidationError as e:
            raise IngestionError(e.errors()[0]["msg"], ar_id=int(ar_id), line=first) from e

    logger.info("Loaded %d ARs with %d features from %s", len(records), len(feature_names), path)
    return records


def records_to_frame(records: Sequence[ARRecord]) -> pd.DataFrame:
    if not records:
        raise DataError("no records to write")
    feature_names = records[0].feature_names
    frames = []
    for record in records:
        if record.feature_names != feature_names:
            raise DataError(f"AR {record.ar_id}: feature columns differ from the first record")
        frame = pd.DataFrame(record.series, columns=feature_names)
        frame.insert(0, "t_index", np.arange(SERIES_LENGTH))
        frame.insert(0, "multi_ar", int(record.multi_ar))
        frame.insert(0, "class_label", record.class_label.value)
        frame.insert(0, "ar_id", record.ar_id)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def write_csv(records: Sequence[ARRecord], path: Union[str, Path]) -> Path:
    """Write records so that ``load_csv`` restores every value exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_to_frame(records).to_csv(
        path, index=False, float_format=lambda v: repr(float(v)), lineterminator="\n"
    )
    return path


def resolve_feature_set(spec: str) -> List[str]:
    """A named set (see FEATURE_SETS) or a comma-separated column list."""
    if spec in FEATURE_SETS:
        return list(FEATURE_SETS[spec])
    names = [s.strip() for s in spec.split(",") if s.strip()]
    if not names:
        raise DataError(f"empty feature selection {spec!r}")
    return names


def select_features(records: Sequence[ARRecord], names: Sequence[str]) -> List[ARRecord]:
    """Project records onto ``names`` (in the given order)."""
    selected = []
    for record in records:
        missing = [n for n in names if n not in record.feature_names]
        if missing:
            raise DataError(f"AR {record.ar_id}: unknown feature(s) {', '.join(missing)}")
        columns = [record.feature_names.index(n) for n in names]
        selected.append(
            record.model_copy(
                update={"feature_names": list(names), "series": record.series[:, columns]}
            )
        )
    return selected


def write_split_manifest(splits: Sequence[CVSplit], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"splits": [s.model_dump() for s in splits]}
    path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    return path


def read_split_manifest(path: Union[str, Path]) -> List[CVSplit]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"split manifest not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return [CVSplit.model_validate(s) for s in payload["splits"]]
    except (json.JSONDecodeError, KeyError, ValidationError) as e:
        raise DataError(f"malformed split manifest {path}: {e}") from e
