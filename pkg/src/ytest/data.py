"""Column-oriented datasets and their CSV representation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import DataError, InsufficientData


@dataclass(frozen=True)
class Dataset:
    """Named, equal-length, finite float columns.

    Column order is preserved and is the order used when the dataset is
    written back to CSV.
    """

    columns: Mapping[str, np.ndarray]

    def __post_init__(self):
        cols = {}
        length = None
        for name, values in self.columns.items():
            arr = np.array(values, dtype=np.float64)
            if arr.ndim != 1:
                raise DataError(f"column {name!r} is not one-dimensional")
            if length is None:
                length = arr.shape[0]
            elif arr.shape[0] != length:
                raise DataError(
                    f"column {name!r} has {arr.shape[0]} rows, expected {length}")
            if not np.isfinite(arr).all():
                row = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise DataError(f"non-finite value in column {name!r} at row {row}")
            arr.setflags(write=False)
            cols[name] = arr
        object.__setattr__(self, "columns", cols)

    @classmethod
    def from_arrays(cls, **columns) -> "Dataset":
        return cls(columns)

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    @property
    def n_rows(self) -> int:
        for arr in self.columns.values():
            return arr.shape[0]
        return 0

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"no column named {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.columns

    def matrix(self, names: Iterable[str]) -> np.ndarray:
        """Stack the named columns into an (n_rows, k) array."""
        names = list(names)
        if not names:
            return np.empty((self.n_rows, 0))
        return np.column_stack([self[nm] for nm in names])

    def with_column(self, name: str, values) -> "Dataset":
        cols = dict(self.columns)
        cols[name] = values
        return Dataset(cols)

    def equals(self, other: "Dataset") -> bool:
        """Bit-for-bit equality of names, order and values."""
        if self.names != other.names:
            return False
        return all(np.array_equal(self[n], other[n]) for n in self.names)


def format_value(x: float) -> str:
    # 17 significant digits round-trip every double
    return format(float(x), ".17g")


def write_csv(dataset: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(dataset_to_csv(dataset))


def dataset_to_csv(dataset: Dataset) -> str:
    lines = [",".join(dataset.names)]
    cols = [dataset[n] for n in dataset.names]
    for i in range(dataset.n_rows):
        lines.append(",".join(format_value(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def load_csv(path) -> Dataset:
    """Read a header-plus-numbers CSV file into a Dataset.

    Raises DataError for a missing file, duplicate or empty header names,
    ragged rows and unparseable or non-finite cells (the message names the
    1-based line and the column), and InsufficientData for an empty body.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InsufficientData(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if any(not h for h in header):
            raise DataError(f"{path}: empty column name in header")
        seen = set()
        for h in header:
            if h in seen:
                raise DataError(f"{path}: duplicate column name {h!r}")
            seen.add(h)
        values = [[] for _ in header]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}")
            for j, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: line {lineno}, column {header[j]!r}: "
                        f"cannot parse {cell.strip()!r} as a number") from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: line {lineno}, column {header[j]!r}: "
                        f"non-finite value {cell.strip()!r}")
                values[j].append(v)
    if not values[0]:
        raise InsufficientData(f"{path}: no data rows")
    return Dataset(dict(zip(header, values)))
