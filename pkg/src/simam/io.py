"""File formats: series CSV, model/truth/manifest JSON, node tables."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import IngestError, SchemaError, SizeError
from .model import FittedModel, TimeSeriesMatrix, validate_series

FLOAT_FMT = ".17g"


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_series_csv(path, min_transitions: int = 2) -> TimeSeriesMatrix:
    """Rows are time points, columns nodes.  A first row with any non-numeric cell is a header."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise SizeError(f"{path}: no data rows")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise IngestError(i, min(len(row), width), f"row {i} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise IngestError(i, j, f"unparsable cell {cell!r} at row {i}, column {j}") from None
    return validate_series(data, min_transitions=min_transitions)


def write_matrix_csv(path, data, header=None):
    data = np.asarray(data, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in data:
            w.writerow([format(float(x), FLOAT_FMT) for x in row])


def write_series_csv(path, X):
    data = X.data if isinstance(X, TimeSeriesMatrix) else X
    write_matrix_csv(path, data, header=[f"node_{j}" for j in range(np.shape(data)[1])])


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_model(path, model: FittedModel):
    Path(path).write_text(model.to_json(), encoding="utf-8")


def read_model(path) -> FittedModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return FittedModel.from_json(text)
    except SchemaError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: not a valid model file ({exc})") from None


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(x, FLOAT_FMT) if isinstance(x, float) else x for x in row])
