import csv
import json
import logging
from pathlib import Path

import pandas as pd

from credit_explainer.dataset.schemas import ColumnKind, Dataset, DatasetSchema
from credit_explainer.errors import MissingColumnError, RowWidthMismatchError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def load_schema(path: str | Path) -> DatasetSchema:
    with open(path, encoding="utf-8") as fh:
        return DatasetSchema.model_validate(json.load(fh))


def _check_row_widths(path: str | Path) -> None:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, skipinitialspace=True)
        header = next(reader, [])
        for row in reader:
            if row and len(row) != len(header):
                raise RowWidthMismatchError(
                    f"line {reader.line_num} of {path} has {len(row)} fields, header has {len(header)}",
                    detail=str(reader.line_num),
                )


def _parse_column(raw: pd.Series, kind: ColumnKind) -> pd.Series:
    if kind == ColumnKind.NUMERIC:
        return pd.to_numeric(raw, errors="coerce").astype(float)
    stripped = raw.str.strip()
    stripped = stripped.mask(stripped == "")
    return stripped.astype(object).where(stripped.notna(), None)


def load_csv(path: str | Path, schema: DatasetSchema) -> Dataset:
    """
    Parse a UTF-8 CSV into a Dataset following the declared column kinds.

    Empty or unparseable cells become missing. Header columns not named in the
    schema are ignored.

    Raises:
        MissingColumnError: a declared column is absent from the header
        RowWidthMismatchError: a row carries more or fewer fields than the header
    """
    _check_row_widths(path)
    try:
        raw = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            na_values=[""],
            encoding="utf-8",
            skipinitialspace=True,
        )
    except pd.errors.ParserError as e:
        raise RowWidthMismatchError(f"row width does not match header in {path}", detail=str(e)) from e

    missing = [name for name in schema.columns if name not in raw.columns]
    if missing:
        raise MissingColumnError(f"columns missing from {path}: {missing}", detail=",".join(missing))

    extra = [name for name in raw.columns if name not in schema.columns]
    if extra:
        logger.info(f"Ignoring undeclared columns: {extra}")

    frame = pd.DataFrame(
        {name: _parse_column(raw[name], kind) for name, kind in schema.columns.items()},
        columns=list(schema.columns),
    )
    n_missing = int(frame.isna().to_numpy().sum())
    logger.info(f"📥 Loaded {len(frame)} rows x {frame.shape[1]} columns from {path} ({n_missing} missing cells)")
    return Dataset(
        frame=frame,
        kinds=dict(schema.columns),
        target_column=schema.target_column,
        grade_column=schema.grade_column,
    )
