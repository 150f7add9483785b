"""
Tabular datasets, CSV ingestion and the column-permutation perturbation.
"""
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..exceptions import DataError


def _read_only(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class Dataset(BaseModel):
    """An n x p matrix of finite float64 values with unique column names."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    columns: Tuple[str, ...]
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_float_matrix(cls, value):
        try:
            array = np.array(value, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise ValueError(f"values must be numeric: {e}")
        return array

    @model_validator(mode="after")
    def _check_shape(self) -> "Dataset":
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        n, p = self.values.shape
        if n < 1 or p < 1:
            raise ValueError(f"dataset must have at least one row and one column, got {n}x{p}")
        if len(self.columns) != p:
            raise ValueError(f"{len(self.columns)} column names for {p} columns")
        if any(not name for name in self.columns):
            raise ValueError("column names must be non-empty")
        if len(set(self.columns)) != p:
            raise ValueError("column names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        _read_only(self.values)
        return self

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "Dataset":
        """Same columns, new values. Skips validation: callers derive values from this dataset."""
        return Dataset.model_construct(columns=self.columns, values=_read_only(values))

    def take_rows(self, rows: Sequence[int]) -> "Dataset":
        return self.with_values(self.values[np.asarray(rows)].copy())

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise DataError(f"unknown column {name!r}", stage="tabular")

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "Dataset":
        return cls(columns=tuple(str(c) for c in frame.columns), values=frame.to_numpy(dtype=np.float64))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=list(self.columns))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.columns == other.columns and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.columns, self.values.tobytes()))


class LabelVector(BaseModel):
    """Class labels in {1, ..., g}."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: np.ndarray
    g: int

    @field_validator("labels", mode="before")
    @classmethod
    def _as_int_vector(cls, value):
        array = np.asarray(value)
        if array.dtype.kind == "f":
            if not np.all(np.isfinite(array)) or not np.all(array == np.round(array)):
                raise ValueError("labels must be integers")
        return np.array(array, dtype=np.int64)

    @model_validator(mode="after")
    def _check_range(self) -> "LabelVector":
        if self.labels.ndim != 1:
            raise ValueError("labels must be a vector")
        if self.g < 2:
            raise ValueError(f"at least two classes are required, got g={self.g}")
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.g):
            raise ValueError(f"labels must lie in 1..{self.g}")
        _read_only(self.labels)
        return self

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @classmethod
    def trusted(cls, labels: np.ndarray, g: int) -> "LabelVector":
        """Wrap labels already known to be in range (model outputs)."""
        return cls.model_construct(labels=_read_only(np.asarray(labels, dtype=np.int64)), g=g)

    def take(self, rows: Sequence[int]) -> "LabelVector":
        return LabelVector.trusted(self.labels[np.asarray(rows)].copy(), self.g)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelVector):
            return NotImplemented
        return self.g == other.g and np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash((self.g, self.labels.tobytes()))


def remap_labels(codes: Sequence) -> LabelVector:
    """Map arbitrary integer class codes onto 1..g, preserving their sorted order."""
    codes = np.asarray(codes)
    classes, labels = np.unique(codes, return_inverse=True)
    try:
        return LabelVector(labels=labels + 1, g=len(classes))
    except ValueError as e:
        raise DataError(f"invalid labels: {e}", stage="tabular")


def _check_field_counts(path: Path) -> None:
    """Every non-blank line must have as many comma-separated fields as the first."""
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise DataError(f"empty file: {path}", stage="tabular")
    width = lines[0].count(",") + 1
    for number, line in enumerate(lines[1:], start=2):
        fields = line.count(",") + 1
        if fields != width:
            raise DataError(f"ragged rows in {path}: line {number} has {fields} fields, expected {width}", stage="tabular")


def _to_float_matrix(body: pd.DataFrame, header: List[str]) -> np.ndarray:
    columns = []
    for j in range(body.shape[1]):
        cells = body.iloc[:, j].str.strip()
        try:
            # float() per cell parses the shortest round-trip repr exactly
            columns.append(cells.to_numpy(dtype=object).astype(np.float64))
        except ValueError:
            for row, cell in enumerate(cells):
                try:
                    float(cell)
                except ValueError:
                    raise DataError(
                        f"non-numeric cell {body.iat[row, j]!r} at row {row + 1}, column {header[j]!r}",
                        stage="tabular"
                    )
            raise
    return np.column_stack(columns)


def load_csv(
    path: Union[str, Path],
    has_header: bool = True,
    label_column: Optional[str] = None
) -> Tuple[Dataset, Optional[LabelVector]]:
    """
    Load a rectangular numeric CSV.

    Args:
        path: CSV file (comma separated, no quoting needed)
        has_header: whether the first line names the columns; otherwise columns are X1..Xp
        label_column: optional name of an integer-coded class column

    Returns:
        (Dataset, LabelVector or None): features in file order minus the label column
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}", stage="tabular")
    _check_field_counts(path)

    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8"
        )
    except pd.errors.ParserError as e:
        raise DataError(f"ragged rows in {path}: {e}", stage="tabular")
    except pd.errors.EmptyDataError:
        raise DataError(f"empty file: {path}", stage="tabular")

    if has_header:
        header = [str(name).strip() for name in raw.iloc[0].tolist()]
        body = raw.iloc[1:].reset_index(drop=True)
        duplicates = sorted({name for name in header if header.count(name) > 1})
        if duplicates:
            raise DataError(f"duplicate header names: {', '.join(duplicates)}", stage="tabular")
        if any(not name for name in header):
            raise DataError("empty header name", stage="tabular")
    else:
        header = [f"X{j + 1}" for j in range(raw.shape[1])]
        body = raw
    if body.empty:
        raise DataError(f"no data rows in {path}", stage="tabular")

    matrix = _to_float_matrix(body, header)
    if not np.all(np.isfinite(matrix)):
        row, col = (int(i) for i in np.argwhere(~np.isfinite(matrix))[0])
        raise DataError(f"non-finite value at row {row + 1}, column {header[col]!r}", stage="tabular")

    labels = None
    if label_column is not None:
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not found", stage="tabular")
        position = header.index(label_column)
        codes = matrix[:, position]
        if not np.all(codes == np.round(codes)):
            raise DataError(f"label column {label_column!r} must hold integer class codes", stage="tabular")
        labels = remap_labels(codes.astype(np.int64))
        matrix = np.delete(matrix, position, axis=1)
        header = header[:position] + header[position + 1:]

    try:
        dataset = Dataset.from_frame(pd.DataFrame(matrix, columns=header))
    except ValueError as e:
        raise DataError(f"invalid dataset in {path}: {e}", stage="tabular")
    logger.debug(f"Loaded {dataset.n}x{dataset.p} dataset from {path}")
    return dataset, labels


def write_csv(
    dataset: Dataset,
    path: Union[str, Path],
    labels: Optional[LabelVector] = None,
    label_column: str = "y"
) -> None:
    """Write a dataset (and optional labels) as CSV with 17 significant digits."""
    frame = dataset.to_frame()
    if labels is not None:
        if labels.n != dataset.n:
            raise DataError("labels and dataset differ in length", stage="tabular")
        frame[label_column] = labels.labels
    frame.to_csv(path, index=False, float_format="%.17g", encoding="utf-8")


def permute_column(dataset: Dataset, j: int, rng: np.random.Generator) -> Dataset:
    """Copy of `dataset` with column j replaced by a uniform random permutation of itself."""
    if not 0 <= j < dataset.p:
        raise DataError(f"column index {j} out of range for p={dataset.p}", stage="tabular")
    values = dataset.values.copy()
    values[:, j] = rng.permutation(values[:, j])
    return dataset.with_values(values)


def permute_columns(dataset: Dataset, indices: Sequence[int], rng: np.random.Generator) -> Dataset:
    """Permute several columns in the given order, each with an independent permutation."""
    result = dataset
    for j in indices:
        result = permute_column(result, int(j), rng)
    return result


def train_test_split(
    dataset: Dataset,
    labels: LabelVector,
    test_fraction: float,
    rng: np.random.Generator
) -> Tuple[Dataset, LabelVector, Dataset, LabelVector]:
    """Random row split; returns (train_X, train_y, test_X, test_y)."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}", stage="tabular")
    order = rng.permutation(dataset.n)
    n_test = max(1, int(round(dataset.n * test_fraction)))
    if n_test >= dataset.n:
        raise DataError("dataset too small to split", stage="tabular")
    test_rows: List[int] = sorted(order[:n_test].tolist())
    train_rows: List[int] = sorted(order[n_test:].tolist())
    return (
        dataset.take_rows(train_rows),
        labels.take(train_rows),
        dataset.take_rows(test_rows),
        labels.take(test_rows)
    )
