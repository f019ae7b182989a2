"""CSV dataset ingestion and export.

Dataset format: UTF-8, comma separated, one header row, feature columns
followed by a single response column.  Numeric output uses 17 significant
digits so doubles round-trip losslessly.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .data import Dataset
from .errors import DataError


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def _read_numeric_csv(path) -> tuple[list[str], np.ndarray]:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError as exc:
        raise DataError(f"file not found: {path}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 1:
            raise DataError(f"{path}: empty header row")
        width = len(header)
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue  # ignore trailing blank lines
            if len(row) != width:
                raise DataError(
                    f"{path}: line {line_no}: expected {width} columns, got {len(row)}"
                )
            parsed = []
            for name, cell in zip(header, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: line {line_no}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}: line {line_no}: non-finite value {cell!r} in column {name!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=np.float64)


def read_feature_csv(path) -> tuple[list[str], np.ndarray]:
    """Feature-only CSV (header row, all columns numeric)."""
    return _read_numeric_csv(path)


def read_dataset_csv(
    path, *, standardize: bool = False, log_response: bool = False
) -> tuple[Dataset, list[str], list[str]]:
    """Read a dataset CSV; the last column is the response.

    Returns (dataset, feature_names, dropped_columns).  With standardize,
    every feature column is shifted/scaled to mean 0 and (population) std 1;
    constant columns would divide by zero and are dropped instead.
    """
    header, values = _read_numeric_csv(path)
    if len(header) < 2:
        raise DataError(f"{path}: need at least one feature column plus a response column")
    features = values[:, :-1]
    responses = values[:, -1]
    names = header[:-1]

    if log_response:
        if np.any(responses <= 0):
            raise DataError(f"{path}: log response transform requires positive responses")
        responses = np.log(responses)

    dropped: list[str] = []
    if standardize:
        keep = []
        for col in range(features.shape[1]):
            column = features[:, col]
            if column.max() == column.min():
                dropped.append(names[col])
            else:
                keep.append(col)
        if not keep:
            raise DataError(f"{path}: all feature columns are constant")
        features = features[:, keep]
        names = [names[c] for c in keep]
        features = (features - features.mean(axis=0)) / features.std(axis=0)

    return Dataset(features, responses), names, dropped


def write_dataset_csv(path, dataset: Dataset, feature_names=None, response_name="y") -> None:
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(dataset.d)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(feature_names) + [response_name])
        for row, response in zip(dataset.features, dataset.responses):
            writer.writerow([format_float(v) for v in row] + [format_float(response)])


def write_predictions_csv(path, predictions) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["prediction"])
        for value in np.asarray(predictions, dtype=np.float64):
            writer.writerow([format_float(value)])


def write_matrix_csv(path, matrix) -> None:
    """Plain numeric grid without a header (Grammian export)."""
    arr = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(arr):
            writer.writerow([format_float(v) for v in row])


def write_rows_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)
