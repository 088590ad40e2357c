"""Typed columnar datasets, CSV ingestion and deterministic synthetic data.

A Dataset is an immutable ordered collection of named columns, each either
numeric (float64, all finite) or categorical (integer codes plus a level
table). Prediction vectors are plain float64 arrays validated against the
dataset they accompany.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError

RNG_ALGORITHM = "numpy default_rng (PCG64)"


@dataclass(frozen=True)
class NumericColumn:
    name: str
    values: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CategoricalColumn:
    name: str
    codes: np.ndarray
    levels: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def decoded(self) -> list[str]:
        return [self.levels[c] for c in self.codes]


Column = NumericColumn | CategoricalColumn


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def numeric_column(name: str, values) -> NumericColumn:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise DataError(f"column {name!r} must be one-dimensional")
    if not np.all(np.isfinite(values)):
        raise DataError(f"column {name!r} contains non-finite values")
    return NumericColumn(name, _freeze(values))


def categorical_column(name: str, values: Sequence[str]) -> CategoricalColumn:
    """Build a categorical column; levels are the sorted unique values."""
    values = [str(v) for v in values]
    levels = tuple(sorted(set(values)))
    index = {lv: i for i, lv in enumerate(levels)}
    codes = np.fromiter((index[v] for v in values), dtype=np.int64, count=len(values))
    return CategoricalColumn(name, _freeze(codes), levels)


@dataclass(frozen=True)
class Dataset:
    columns: tuple[Column, ...]
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if not self.columns:
            raise DataError("dataset has no columns")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names")
        n = self.columns[0].n_rows
        for c in self.columns:
            if c.n_rows != n:
                raise DataError(f"column {c.name!r} has {c.n_rows} rows, expected {n}")
        object.__setattr__(self, "_index", {c.name: c for c in self.columns})

    @property
    def n_rows(self) -> int:
        return self.columns[0].n_rows

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        try:
            return self._index[name]
        except KeyError:
            raise DataError(f"no column named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def replace(self, name: str, values) -> "Dataset":
        """Return a new dataset with one column's values replaced."""
        old = self.column(name)
        if isinstance(old, NumericColumn):
            new = numeric_column(name, values)
        else:
            new = categorical_column(name, values)
        return Dataset(tuple(new if c.name == name else c for c in self.columns))

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        cols = []
        for c in self.columns:
            if isinstance(c, NumericColumn):
                cols.append(NumericColumn(c.name, _freeze(c.values[rows])))
            else:
                cols.append(CategoricalColumn(c.name, _freeze(c.codes[rows]), c.levels))
        return Dataset(tuple(cols))

    def tile(self, reps: int) -> "Dataset":
        cols = []
        for c in self.columns:
            if isinstance(c, NumericColumn):
                cols.append(NumericColumn(c.name, _freeze(np.tile(c.values, reps))))
            else:
                cols.append(CategoricalColumn(c.name, _freeze(np.tile(c.codes, reps)), c.levels))
        return Dataset(tuple(cols))


def from_arrays(names: Sequence[str], arrays: Sequence) -> Dataset:
    """Build a dataset of numeric columns from parallel arrays."""
    return Dataset(tuple(numeric_column(n, a) for n, a in zip(names, arrays)))


def validate_predictions(dataset: Dataset, predictions) -> np.ndarray:
    predictions = np.asarray(predictions, dtype=np.float64)
    if predictions.ndim != 1 or predictions.shape[0] != dataset.n_rows:
        raise DataError(
            f"predictions have length {predictions.shape}, dataset has {dataset.n_rows} rows"
        )
    if not np.all(np.isfinite(predictions)):
        raise DataError("predictions contain non-finite values")
    return _freeze(predictions)


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _parse_numeric(cell: str):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, prediction_column: str, type_hints: Mapping[str, str] | None = None):
    """Read a CSV file into a (Dataset, predictions) pair.

    The prediction column must parse as numeric and is returned separately.
    A column is categorical if any cell fails numeric parsing or a hint
    forces it; missing values and ragged rows are rejected.
    """
    type_hints = dict(type_hints or {})
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        raw: list[list[str]] = [[] for _ in header]
        for rownum, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: ragged row {rownum}: {len(row)} cells, expected {len(header)}"
                )
            for j, cell in enumerate(row):
                if cell == "":
                    raise DataError(
                        f"{path}: missing value at row {rownum} (column {header[j]!r})"
                    )
                raw[j].append(cell)
    if not raw[0]:
        raise DataError(f"{path}: no data rows")
    if prediction_column not in header:
        raise DataError(f"prediction column {prediction_column!r} not found in {path}")

    for name in type_hints:
        if name not in header:
            raise DataError(f"type hint for unknown column {name!r}")

    columns: list[Column] = []
    predictions = None
    for name, cells in zip(header, raw):
        parsed = [_parse_numeric(c) for c in cells]
        all_numeric = all(v is not None for v in parsed)
        if name == prediction_column:
            if not all_numeric:
                bad = next(i for i, v in enumerate(parsed) if v is None)
                raise DataError(
                    f"prediction column {name!r} is not numeric at row {bad + 1}"
                )
            predictions = np.asarray(parsed, dtype=np.float64)
            continue
        hint = type_hints.get(name)
        if hint not in (None, "numeric", "categorical"):
            raise DataError(f"unknown type hint {hint!r} for column {name!r}")
        if hint == "numeric" and not all_numeric:
            bad = next(i for i, v in enumerate(parsed) if v is None)
            raise DataError(f"column {name!r} hinted numeric but row {bad + 1} does not parse")
        if all_numeric and hint != "categorical":
            columns.append(numeric_column(name, parsed))
        else:
            columns.append(categorical_column(name, cells))

    dataset = Dataset(tuple(columns))
    return dataset, validate_predictions(dataset, predictions)


def format_float(x: float) -> str:
    """Shortest decimal representation that round-trips the float exactly."""
    return repr(float(x))


def write_csv(path, dataset: Dataset, predictions=None, prediction_column: str = "yhat") -> None:
    """Write a dataset (and optional prediction column) as CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = dataset.names + ([prediction_column] if predictions is not None else [])
        writer.writerow(header)
        decoded = []
        for c in dataset.columns:
            if isinstance(c, NumericColumn):
                decoded.append([format_float(v) for v in c.values])
            else:
                decoded.append(c.decoded())
        if predictions is not None:
            decoded.append([format_float(v) for v in np.asarray(predictions)])
        for i in range(dataset.n_rows):
            writer.writerow([col[i] for col in decoded])


# ---------------------------------------------------------------------------
# Deterministic generators
# ---------------------------------------------------------------------------


def friedman1_structural(x: np.ndarray) -> np.ndarray:
    """Noise-free benchmark response on the first five of >=5 features."""
    return (
        10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
        + 20.0 * (x[:, 2] - 0.5) ** 2
        + 10.0 * x[:, 3]
        + 5.0 * x[:, 4]
    )


def gen_friedman1(n: int, seed: int, noise_sd: float = 0.0):
    """Generate the 10-feature uniform benchmark with optional Gaussian noise.

    Returns (Dataset, predictions). The feature stream is independent of
    noise_sd, so two calls with the same (n, seed) share features exactly.
    """
    if n < 1:
        raise DataError("n must be >= 1")
    if noise_sd < 0:
        raise DataError("noise_sd must be >= 0")
    rng = np.random.default_rng(seed)
    x = rng.random((n, 10))
    y = friedman1_structural(x) + noise_sd * rng.standard_normal(n)
    ds = from_arrays([f"x{j + 1}" for j in range(10)], [x[:, j] for j in range(10)])
    return ds, validate_predictions(ds, y)


def gen_correlated_pair(n: int, seed: int) -> Dataset:
    """Two strongly correlated features: x1 = u + z1, x2 = u + z2.

    u is Uniform[0,1]; z1, z2 are independent N(0, 0.05^2).
    """
    if n < 1:
        raise DataError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    z1 = rng.normal(0.0, 0.05, n)
    z2 = rng.normal(0.0, 0.05, n)
    return from_arrays(["x1", "x2"], [u + z1, u + z2])


def gen_circle(n: int, d: int, seed: int):
    """Uniform points on [-1, 1]^d labelled by a centered ball of equal volume.

    The 0/1 label vector doubles as the prediction column for benchmarking.
    """
    if n < 1 or d < 2:
        raise DataError("need n >= 1 and d >= 2")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, (n, d))
    # radius of the d-ball that covers half of the cube's volume
    radius = (2.0 ** (d - 1) * math.gamma(d / 2.0 + 1.0) / math.pi ** (d / 2.0)) ** (1.0 / d)
    labels = (np.sum(x * x, axis=1) <= radius * radius).astype(np.float64)
    ds = from_arrays([f"x{j + 1}" for j in range(d)], [x[:, j] for j in range(d)])
    return ds, validate_predictions(ds, labels)


# ---------------------------------------------------------------------------
# Builtin analytic prediction functions
# ---------------------------------------------------------------------------


def _require_numeric(dataset: Dataset, count: int, fn_name: str) -> np.ndarray:
    if len(dataset.columns) < count:
        raise DataError(f"{fn_name} needs {count} feature columns, got {len(dataset.columns)}")
    cols = []
    for c in dataset.columns[:count]:
        if not isinstance(c, NumericColumn):
            raise DataError(f"{fn_name} needs numeric features; {c.name!r} is categorical")
        cols.append(c.values)
    return np.column_stack(cols)


def _stability_a(dataset: Dataset) -> np.ndarray:
    x = _require_numeric(dataset, 2, "stability_a")
    return x[:, 0] + x[:, 1] ** 2


def _stability_b(dataset: Dataset) -> np.ndarray:
    # off-manifold perturbation; vanishes where x1 == x2
    x = _require_numeric(dataset, 2, "stability_b")
    return x[:, 0] + x[:, 1] ** 2 + 10.0 * (x[:, 0] - x[:, 1]) ** 3


def _friedman1(dataset: Dataset) -> np.ndarray:
    return friedman1_structural(_require_numeric(dataset, 5, "friedman1"))


BUILTIN_FUNCTIONS = {
    "friedman1": _friedman1,
    "stability_a": _stability_a,
    "stability_b": _stability_b,
}


def eval_builtin(fn_name: str, rows: Dataset) -> np.ndarray:
    """Evaluate a named analytic prediction function exactly (no noise)."""
    try:
        fn = BUILTIN_FUNCTIONS[fn_name]
    except KeyError:
        valid = ", ".join(sorted(BUILTIN_FUNCTIONS))
        raise DataError(f"unknown builtin {fn_name!r}; valid names: {valid}") from None
    return validate_predictions(rows, fn(rows))
