"""Per-feature encoders: indicator, step and piecewise-linear weight bases.

An encoder maps a scalar feature value to k nonnegative weights that sum to
one. Indicator and step encoders are one-hot; the linear encoder spreads
weight over at most two adjacent knots and extrapolates constantly outside
the observed range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import CategoricalColumn, Column, NumericColumn
from .errors import DataError, UnknownLevelError

NUMERIC_KINDS = ("linear", "step")


@dataclass(frozen=True)
class Encoder:
    feature: str
    kind: str  # "indicator" | "step" | "linear"
    grid: np.ndarray | None = None  # numeric kinds; step stores interior breakpoints
    levels: tuple[str, ...] | None = None  # categorical indicator
    vmin: float | None = None
    vmax: float | None = None

    @property
    def k(self) -> int:
        if self.levels is not None:
            return len(self.levels)
        if self.kind == "step":
            return len(self.grid) + 1
        return len(self.grid)

    @property
    def is_categorical(self) -> bool:
        return self.levels is not None

    def __post_init__(self):
        if self.kind not in ("indicator", "step", "linear"):
            raise DataError(f"unknown encoder kind {self.kind!r}")
        if self.grid is not None:
            grid = np.asarray(self.grid, dtype=np.float64)
            if grid.ndim != 1 or (grid.size > 1 and not np.all(np.diff(grid) > 0)):
                raise DataError(f"encoder grid for {self.feature!r} must be strictly increasing")
            object.__setattr__(self, "grid", grid)
        if self.levels is not None and len(set(self.levels)) != len(self.levels):
            raise DataError(f"duplicate levels in encoder for {self.feature!r}")
        if self.kind == "linear" and self.grid is not None and self.grid.size < 2:
            raise DataError("linear encoder needs at least 2 knots")


def build_encoder(column: Column, k_max: int, kind: str | None = None) -> Encoder:
    """Choose an encoder for one column.

    Categorical columns and numeric columns with at most k_max distinct
    values get indicator encoders over their distinct values; other numeric
    columns get a linear (default) or step encoder with knots/breakpoints at
    empirical quantiles, duplicates collapsed.
    """
    if k_max < 2:
        raise DataError("k_max must be >= 2")
    if column.n_rows == 0:
        raise DataError(f"column {column.name!r} is empty")
    if isinstance(column, CategoricalColumn):
        return Encoder(column.name, "indicator", levels=column.levels)

    values = column.values
    vmin = float(values.min())
    vmax = float(values.max())
    distinct = np.unique(values)
    if distinct.size <= k_max:
        return Encoder(column.name, "indicator", grid=distinct, vmin=vmin, vmax=vmax)

    if kind is None:
        kind = "linear"
    if kind not in NUMERIC_KINDS:
        raise DataError(f"numeric encoder kind must be one of {NUMERIC_KINDS}, got {kind!r}")
    if kind == "linear":
        probs = np.arange(k_max) / (k_max - 1)
        knots = np.unique(np.quantile(values, probs))
        if knots.size < 2:  # constant column; cannot happen past the distinct check
            return Encoder(column.name, "indicator", grid=knots, vmin=vmin, vmax=vmax)
        return Encoder(column.name, "linear", grid=knots, vmin=vmin, vmax=vmax)
    probs = np.arange(1, k_max) / k_max
    breaks = np.unique(np.quantile(values, probs))
    return Encoder(column.name, "step", grid=breaks, vmin=vmin, vmax=vmax)


def _categorical_codes(encoder: Encoder, data) -> np.ndarray:
    if isinstance(data, CategoricalColumn):
        if data.levels == encoder.levels:
            return data.codes.astype(np.int64)
        lookup = {lv: i for i, lv in enumerate(encoder.levels)}
        out = np.empty(data.n_rows, dtype=np.int64)
        for i, code in enumerate(data.codes):
            level = data.levels[code]
            if level not in lookup:
                raise UnknownLevelError(encoder.feature, level)
            out[i] = lookup[level]
        return out
    lookup = {lv: i for i, lv in enumerate(encoder.levels)}
    out = np.empty(len(data), dtype=np.int64)
    for i, v in enumerate(data):
        key = str(v)
        if key not in lookup:
            raise UnknownLevelError(encoder.feature, key)
        out[i] = lookup[key]
    return out


def _indicator_numeric_codes(encoder: Encoder, values: np.ndarray) -> np.ndarray:
    grid = encoder.grid
    idx = np.searchsorted(grid, values)
    idx_c = np.clip(idx, 0, grid.size - 1)
    bad = grid[idx_c] != values
    if np.any(bad):
        v = values[np.argmax(bad)]
        raise UnknownLevelError(encoder.feature, v)
    return idx_c.astype(np.int64)


def encode_column(encoder: Encoder, data):
    """Encode a whole column of raw values.

    Returns (i0, w0, i1, w1): weight w0 on slot i0 plus w1 on slot i1; for
    one-hot kinds i1 == i0 and w1 == 0.
    """
    if encoder.is_categorical:
        codes = _categorical_codes(encoder, data)
        n = codes.shape[0]
        return codes, np.ones(n), codes, np.zeros(n)
    if isinstance(data, NumericColumn):
        values = data.values
    else:
        values = np.asarray(data, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DataError(f"non-finite value passed to encoder for {encoder.feature!r}")
    if encoder.kind == "indicator":
        codes = _indicator_numeric_codes(encoder, values)
        n = codes.shape[0]
        return codes, np.ones(n), codes, np.zeros(n)
    if encoder.kind == "step":
        idx = kernels.encode_step(values, encoder.grid)
        n = idx.shape[0]
        return idx, np.ones(n), idx, np.zeros(n)
    return kernels.encode_linear(values, encoder.grid)


def encode(encoder: Encoder, value) -> np.ndarray:
    """Encode a single value to a dense weight vector of length k."""
    if encoder.is_categorical:
        i0, w0, i1, w1 = encode_column(encoder, [value])
    else:
        i0, w0, i1, w1 = encode_column(encoder, np.asarray([value], dtype=np.float64))
    out = np.zeros(encoder.k)
    out[i0[0]] += w0[0]
    out[i1[0]] += w1[0]
    return out



def encoder_to_dict(encoder: Encoder) -> dict:
    d = {"feature": encoder.feature, "kind": encoder.kind}
    if encoder.is_categorical:
        d["grid"] = list(encoder.levels)
    else:
        d["grid"] = [float(v) for v in encoder.grid]
        d["vmin"] = encoder.vmin
        d["vmax"] = encoder.vmax
    return d


def encoder_from_dict(d: dict) -> Encoder:
    kind = d["kind"]
    if kind == "indicator" and d["grid"] and isinstance(d["grid"][0], str):
        return Encoder(d["feature"], "indicator", levels=tuple(d["grid"]))
    return Encoder(
        d["feature"],
        kind,
        grid=np.asarray(d["grid"], dtype=np.float64),
        vmin=d.get("vmin"),
        vmax=d.get("vmax"),
    )
