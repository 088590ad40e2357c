"""Partial dependence, PD-based decomposition and the interaction H-statistic.

Works for any predictor: a fitted MidModel or any callable mapping a
Dataset to a prediction array. PD at a query point overwrites the chosen
features across all dataset rows and averages the predictions; the
decomposition centers each effect empirically over the dataset and
subtracts lower-order effects. Evaluation is chunked so large
grid-by-rows products stay within memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CategoricalColumn, Dataset
from .errors import DataError, UndefinedRatioError

_CHUNK_ROWS = 200_000


def as_predictor(obj):
    """Normalize a predictor to a callable Dataset -> ndarray."""
    from .model import MidModel, predict

    if isinstance(obj, MidModel):
        return lambda ds: predict(obj, ds)
    if callable(obj):
        return obj
    raise DataError("predictor must be a MidModel or a callable")


def _feature_list(dataset: Dataset, features) -> list[str]:
    if isinstance(features, str):
        features = [features]
    names = [str(f) for f in features]
    if not 1 <= len(names) <= 2 or len(set(names)) != len(names):
        raise DataError("features must name 1 or 2 distinct columns")
    for n in names:
        if n not in dataset:
            raise DataError(f"feature {n!r} not in dataset")
    return names


def default_grid(dataset: Dataset, feature: str, grid_size: int = 51):
    """Evaluation points: equispaced over the observed range, or all levels."""
    col = dataset.column(feature)
    if isinstance(col, CategoricalColumn):
        return list(col.levels)
    return np.linspace(float(col.values.min()), float(col.values.max()), grid_size)


def _column_points(dataset: Dataset, name: str) -> list:
    col = dataset.column(name)
    return col.decoded() if isinstance(col, CategoricalColumn) else list(col.values)


def _pd_at_points(fn, dataset: Dataset, names: list[str], cols: list[list]) -> np.ndarray:
    """Average prediction with the named features overwritten point by point.

    cols holds one list of query values per named feature; all lists share
    length q. Returns the q partial-dependence values.
    """
    n = dataset.n_rows
    q = len(cols[0])
    out = np.empty(q)
    chunk = max(1, _CHUNK_ROWS // max(n, 1))
    for start in range(0, q, chunk):
        stop = min(start + chunk, q)
        reps = stop - start
        big = dataset.tile(reps)
        for name, values in zip(names, cols):
            vals = values[start:stop]
            col = dataset.column(name)
            if isinstance(col, CategoricalColumn):
                big = big.replace(name, np.repeat(np.asarray(vals, dtype=object), n))
            else:
                big = big.replace(name, np.repeat(np.asarray(vals, dtype=np.float64), n))
        preds = np.asarray(fn(big), dtype=np.float64).reshape(reps, n)
        out[start:stop] = preds.mean(axis=1)
    return out


@dataclass
class PdResult:
    features: list[str]
    grid: list  # per-feature evaluation points
    values: np.ndarray  # (g1,) or (g1, g2)


def pd_values(predictor, dataset: Dataset, features, grid=None, grid_size: int = 51) -> PdResult:
    """Raw partial dependence of one or two features on a grid."""
    fn = as_predictor(predictor)
    names = _feature_list(dataset, features)
    grid = _normalize_grid(dataset, names, grid, grid_size)
    if len(names) == 1:
        values = _pd_at_points(fn, dataset, names, [list(grid[0])])
    else:
        g1, g2 = list(grid[0]), list(grid[1])
        mesh = [[a for a in g1 for _ in g2], [b for _ in g1 for b in g2]]
        values = _pd_at_points(fn, dataset, names, mesh).reshape(len(g1), len(g2))
    return PdResult(names, grid, values)


def _normalize_grid(dataset, names, grid, grid_size):
    if grid is None:
        return [default_grid(dataset, n, grid_size) for n in names]
    if len(names) == 1:
        if isinstance(grid, (list, tuple)) and len(grid) == 1:
            return [np.asarray(grid[0]) if not isinstance(grid[0][0], str) else list(grid[0])]
        return [np.asarray(grid) if not isinstance(grid[0], str) else list(grid)]
    if len(grid) != 2:
        raise DataError("pair PD needs one grid per feature")
    return [g if isinstance(g[0], str) else np.asarray(g) for g in grid]


@dataclass
class PdEffect:
    """Centered PD effect: values on a grid plus values at the dataset rows."""

    features: list[str]
    grid: list | None
    values: np.ndarray | None  # centered effect on the grid (None if no grid asked)
    at_data: np.ndarray  # centered effect at each dataset row


def _main_effect(fn, dataset, name, grid_pts) -> PdEffect:
    at_data_raw = _pd_at_points(fn, dataset, [name], [_column_points(dataset, name)])
    center = float(at_data_raw.mean())
    values = None
    if grid_pts is not None:
        values = _pd_at_points(fn, dataset, [name], [list(grid_pts)]) - center
    return PdEffect([name], None if grid_pts is None else [grid_pts], values, at_data_raw - center)


def _pair_effect(fn, dataset, names, grid) -> tuple[PdEffect, PdEffect, PdEffect]:
    main_a = _main_effect(fn, dataset, names[0], None if grid is None else grid[0])
    main_b = _main_effect(fn, dataset, names[1], None if grid is None else grid[1])
    data_cols = [_column_points(dataset, n) for n in names]
    at_data_raw = _pd_at_points(fn, dataset, names, data_cols)
    center = float(at_data_raw.mean())
    at_data = at_data_raw - center - main_a.at_data - main_b.at_data
    values = None
    if grid is not None:
        g1, g2 = list(grid[0]), list(grid[1])
        mesh = [[a for a in g1 for _ in g2], [b for _ in g1 for b in g2]]
        raw = _pd_at_points(fn, dataset, names, mesh).reshape(len(g1), len(g2))
        values = raw - center - main_a.values[:, None] - main_b.values[None, :]
    return PdEffect(names, grid, values, at_data), main_a, main_b


def pd_decompose(predictor, dataset: Dataset, features, grid=None, grid_size: int = 51) -> PdEffect:
    """PD-based functional decomposition effect for one or two features.

    Main effects are centered by the empirical mean over the dataset's own
    feature values; pair effects additionally subtract both centered mains.
    """
    fn = as_predictor(predictor)
    names = _feature_list(dataset, features)
    grid = _normalize_grid(dataset, names, grid, grid_size)
    if len(names) == 1:
        return _main_effect(fn, dataset, names[0], grid[0])
    pair, _, _ = _pair_effect(fn, dataset, names, grid)
    return pair


def h_statistic(predictor, dataset: Dataset, pair) -> float:
    """Share of a pair's joint PD variation due to its pure interaction."""
    fn = as_predictor(predictor)
    names = _feature_list(dataset, pair)
    if len(names) != 2:
        raise DataError("h_statistic needs a pair of distinct features")
    joint, main_a, main_b = _pair_effect(fn, dataset, names, grid=None)
    num = float(np.sum(joint.at_data**2))
    den = float(np.sum((joint.at_data + main_a.at_data + main_b.at_data) ** 2))
    if den == 0.0:
        raise UndefinedRatioError("joint partial dependence is constant; H undefined")
    return num / den
