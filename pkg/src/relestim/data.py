"""Dataset container, delimited-text ingestion, and the bundled case-study data."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DataError, EmptySource, NonFiniteValue, ParseError


@dataclass
class Dataset:
    """A fixed design matrix (one row per observation) and response vector."""

    X: np.ndarray
    y: np.ndarray
    names: tuple = ()  # predictor column names; generated when empty

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=float)
        self.y = np.ascontiguousarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError(
                f"design/response shapes do not match: {self.X.shape} vs {self.y.shape}"
            )
        n, k = self.X.shape
        if n < k + 1:
            raise ValueError(f"need at least k+1 = {k + 1} observations, got {n}")
        if not (np.isfinite(self.X).all() and np.isfinite(self.y).all()):
            raise ValueError("dataset contains non-finite entries")
        if not self.names:
            self.names = tuple(f"x{j + 1}" for j in range(k))
        elif len(self.names) != k:
            raise ValueError("one name per predictor column required")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass
class TabularSource:
    """Where and how to read a delimited numeric table.

    Exactly one of ``path`` or ``text`` must be set.  The response column
    may be given by header name or 0-based index; the default is the last
    column.  With ``intercept`` a leading column of ones is prepended.
    """

    path: str | Path | None = None
    text: str | None = None
    delimiter: str = ","
    has_header: bool = True
    response: str | int | None = None
    intercept: bool = True


def _parse_cell(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(
            f"row {row}, column {column}: could not parse {cell.strip()!r} as a number",
            row=row,
            column=column,
        ) from None
    if not math.isfinite(value):
        raise NonFiniteValue(f"row {row}, column {column}: non-finite value {cell.strip()!r}")
    return value


def read_dataset(src: TabularSource) -> Dataset:
    """Parse a delimited numeric table into a Dataset.

    Row order is preserved.  Raises ParseError (with row/column coordinates),
    NonFiniteValue, or EmptySource; unreadable paths raise OSError.
    """
    if (src.path is None) == (src.text is None):
        raise ValueError("exactly one of path or text must be given")
    if src.path is not None:
        with open(src.path, newline="") as fh:
            rows = list(csv.reader(fh, delimiter=src.delimiter))
    else:
        rows = list(csv.reader(io.StringIO(src.text), delimiter=src.delimiter))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptySource("source contains no rows")

    if src.has_header:
        header, data_rows = [h.strip() for h in rows[0]], rows[1:]
    else:
        header = [f"c{j + 1}" for j in range(len(rows[0]))]
        data_rows = rows
    if not data_rows:
        raise EmptySource("source contains a header but no data rows")
    width = len(header)
    if width < 2:
        raise DataError("need at least one predictor column and one response column")

    if src.response is None:
        resp_idx = width - 1
    elif isinstance(src.response, int):
        resp_idx = src.response if src.response >= 0 else width + src.response
        if not 0 <= resp_idx < width:
            raise DataError(f"response column index {src.response} out of range")
    else:
        try:
            resp_idx = header.index(src.response)
        except ValueError:
            raise DataError(f"response column {src.response!r} not found in header") from None

    values = np.empty((len(data_rows), width))
    for i, row in enumerate(data_rows):
        if len(row) != width:
            raise ParseError(
                f"row {i + 1}: expected {width} cells, found {len(row)}", row=i + 1
            )
        for j, cell in enumerate(row):
            values[i, j] = _parse_cell(cell, i + 1, header[j])

    predictor_idx = [j for j in range(width) if j != resp_idx]
    X = values[:, predictor_idx]
    names = [header[j] for j in predictor_idx]
    if src.intercept:
        X = np.column_stack([np.ones(len(data_rows)), X])
        names = ["intercept"] + names
    return Dataset(X, values[:, resp_idx], tuple(names))


def write_dataset(dataset: Dataset, path_or_file, response_name: str = "y") -> None:
    """Write a Dataset as CSV with shortest round-trip decimal formatting."""

    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(list(dataset.names) + [response_name])
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.X[i]]
            writer.writerow(row + [repr(float(dataset.y[i]))])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


# Yearly totals of international phone calls from Belgium, 1950-73, in tens
# of millions.  Years 64-69 are recorded on a different basis and act as
# gross y-direction outliers; the series drops back afterwards.
_BELGIUM = (
    (50, 0.44), (51, 0.47), (52, 0.47), (53, 0.59),
    (54, 0.66), (55, 0.73), (56, 0.81), (57, 0.88),
    (58, 1.06), (59, 1.2), (60, 1.35), (61, 1.49),
    (62, 1.61), (63, 2.12), (64, 11.9), (65, 12.4),
    (66, 14.2), (67, 15.9), (68, 18.2), (69, 21.2),
    (70, 4.3), (71, 2.4), (72, 2.7), (73, 2.9),
)

BELGIUM_YEARS = tuple(pair[0] for pair in _BELGIUM)
BELGIUM_CALLS = tuple(pair[1] for pair in _BELGIUM)


def belgium_dataset() -> Dataset:
    """The Belgium phone-calls data with an intercept column prepended."""
    years = np.array(BELGIUM_YEARS, dtype=float)
    X = np.column_stack([np.ones(years.size), years])
    return Dataset(X, np.array(BELGIUM_CALLS), ("intercept", "year"))
