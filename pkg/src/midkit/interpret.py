"""Interpretation queries over a fitted surrogate model.

All operations are pure reads: term importance, per-prediction breakdowns
with waterfall cumulative sums, ICE (ceteris-paribus) curves, and exact
Shapley values of the surrogate, where each feature receives its main
effect plus an equal share of every interaction containing it. A brute
force subset-enumeration Shapley serves as the oracle for the closed form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Dataset
from .design import TermKey
from .encoding import encode_column
from .errors import DataError
from .model import MidModel, _EncodeCache, predict, term_values

# ---------------------------------------------------------------------------
# Importance
# ---------------------------------------------------------------------------


@dataclass
class ImportanceRow:
    term: TermKey
    label: str
    importance: float
    rank: int


@dataclass
class ImportanceTable:
    rows: list[ImportanceRow]

    def __iter__(self):
        return iter(self.rows)

    def value(self, label: str) -> float:
        for r in self.rows:
            if r.label == label:
                return r.importance
        raise DataError(f"no term {label!r} in importance table")


def importance(model: MidModel, dataset: Dataset) -> ImportanceTable:
    """Mean absolute effect of each term over the dataset, sorted descending."""
    cache = _EncodeCache(model, dataset)
    scored = []
    for t in model.terms:
        values = term_values(model, dataset, t, cache)
        scored.append((t, float(np.mean(np.abs(values)))))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return ImportanceTable(
        [ImportanceRow(t, model.term_label(t), v, i + 1) for i, (t, v) in enumerate(scored)]
    )


# ---------------------------------------------------------------------------
# Prediction breakdown
# ---------------------------------------------------------------------------


@dataclass
class BreakdownEntry:
    term: TermKey
    label: str
    contribution: float


@dataclass
class BreakdownResult:
    intercept: float
    entries: list[BreakdownEntry]  # sorted by |contribution| descending
    cumulative: np.ndarray  # running sums, cumulative[0] == intercept
    total: float  # the model prediction for the row


def breakdown(model: MidModel, dataset: Dataset, row: int = 0) -> BreakdownResult:
    """Decompose one prediction into per-term contributions.

    Contributions are exactly the term effects at the row, sorted by
    absolute size (ties broken by term key); no value is invented or
    dropped, so intercept plus contributions recovers the prediction.
    """
    if not 0 <= row < dataset.n_rows:
        raise DataError(f"row {row} out of range for {dataset.n_rows} rows")
    one = dataset.take([row])
    cache = _EncodeCache(model, one)
    contribs = [(t, float(term_values(model, one, t, cache)[0])) for t in model.terms]
    total = float(predict(model, one)[0])
    contribs.sort(key=lambda item: (-abs(item[1]), item[0]))
    cumulative = np.empty(len(contribs) + 1)
    cumulative[0] = model.intercept
    acc = model.intercept
    for i, (_, c) in enumerate(contribs):
        acc += c
        cumulative[i + 1] = acc
    entries = [BreakdownEntry(t, model.term_label(t), c) for t, c in contribs]
    return BreakdownResult(model.intercept, entries, cumulative, total)


# ---------------------------------------------------------------------------
# ICE / ceteris-paribus curves
# ---------------------------------------------------------------------------


@dataclass
class IceCurves:
    variable: str
    grid: np.ndarray | list  # numeric grid or categorical levels
    curves: np.ndarray  # (n_rows, len(grid))
    centered: bool
    reference: object | None  # grid point subtracted when centered
    term: str | None  # set when restricted to a single term's sweep
    observed_values: np.ndarray | list
    observed_curve: np.ndarray  # curve value at each row's own observation


def _sweep_grid(model: MidModel, dataset: Dataset, feature: int, grid_size: int):
    name = model.feature_names[feature]
    col = dataset.column(name)
    if hasattr(col, "levels"):
        enc = model.encoder_for(feature, 1) if (feature,) in model.terms else None
        if enc is None:
            for t in model.terms:
                if feature in t:
                    enc = model.encoder_for(feature, len(t))
                    break
        levels = list(enc.levels) if enc is not None else list(col.levels)
        return levels, col.decoded()
    lo, hi = float(col.values.min()), float(col.values.max())
    return np.linspace(lo, hi, grid_size), col.values


def _pair_sweep(model, term: TermKey, feature: int, grid_vals, cache: _EncodeCache):
    """Values of a pair term with `feature` swept over grid_vals: (n, g)."""
    p, q = term
    et = model.terms[term]
    coef = et.coef if feature == p else et.coef.T
    other = q if feature == p else p
    gi0, gw0, gi1, gw1 = encode_column(model.encoder_for(feature, 2), grid_vals)
    rows = gw0[:, None] * coef[gi0, :] + gw1[:, None] * coef[gi1, :]  # (g, k_other)
    oi0, ow0, oi1, ow1 = cache.get(other, 2)
    return (rows[:, oi0] * ow0 + rows[:, oi1] * ow1).T  # (n, g)


def ice(
    model: MidModel,
    dataset: Dataset,
    variable: str,
    grid_size: int = 41,
    centered: bool = False,
    term_restrict=None,
) -> IceCurves:
    """Ceteris-paribus curves: sweep one feature, hold each row's others fixed.

    Full curves evaluate the whole surrogate; term_restrict returns only the
    named term's sweep. Centered curves subtract the value at the first grid
    point so all curves start at zero there.
    """
    if grid_size < 2:
        raise DataError("grid_size must be >= 2")
    if variable not in model.feature_names:
        raise DataError(f"unknown variable {variable!r}")
    j = model.feature_index(variable)
    grid, observed = _sweep_grid(model, dataset, j, grid_size)
    n = dataset.n_rows
    g = len(grid)
    cache = _EncodeCache(model, dataset)

    if term_restrict is not None:
        key = model.resolve_term(term_restrict)
        if j not in key:
            raise DataError(f"term {model.term_label(key)!r} does not contain {variable!r}")
        if len(key) == 1:
            enc = encode_column(model.encoder_for(j, 1), grid)
            sweep = kernels.eval_main(model.terms[key].coef, *enc)
            curves = np.tile(sweep, (n, 1))
        else:
            curves = _pair_sweep(model, key, j, grid, cache)
        observed_curve = term_values(model, dataset, key, cache)
        label = model.term_label(key)
    else:
        preds = predict(model, dataset)
        j_terms = [t for t in model.terms if j in t]
        own = np.zeros(n)
        for t in j_terms:
            own += term_values(model, dataset, t, cache)
        base = preds - own
        curves = np.tile(base[:, None], (1, g))
        for t in j_terms:
            if len(t) == 1:
                enc = encode_column(model.encoder_for(j, 1), grid)
                curves += kernels.eval_main(model.terms[t].coef, *enc)[None, :]
            else:
                curves += _pair_sweep(model, t, j, grid, cache)
        observed_curve = preds
        label = None

    reference = None
    if centered:
        reference = grid[0]
        curves = curves - curves[:, [0]]
    return IceCurves(variable, grid, curves, centered, reference, label, observed, observed_curve)


# ---------------------------------------------------------------------------
# Surrogate Shapley values
# ---------------------------------------------------------------------------


@dataclass
class ShapMatrix:
    values: np.ndarray  # (n_rows, n_used_features)
    feature_names: list[str]
    intercept: float


def mid_shapley(model: MidModel, dataset: Dataset) -> ShapMatrix:
    """Closed-form Shapley values of the surrogate.

    Each feature gets its main effect plus 1/|J| of every higher-order
    effect containing it, so rows sum to prediction minus intercept.
    """
    used = model.features
    pos = {f: i for i, f in enumerate(used)}
    cache = _EncodeCache(model, dataset)
    values = np.zeros((dataset.n_rows, len(used)))
    for t in model.terms:
        share = term_values(model, dataset, t, cache) / len(t)
        for f in t:
            values[:, pos[f]] += share
    return ShapMatrix(values, [model.feature_names[f] for f in used], model.intercept)


def brute_force_shapley(model: MidModel, dataset: Dataset, row: int = 0) -> np.ndarray:
    """Exact Shapley values by full subset enumeration (oracle path).

    The characteristic function of a coalition S sums the effects of all
    terms fully contained in S. Feature order matches mid_shapley columns.
    """
    used = model.features
    d = len(used)
    if d > 20:
        raise DataError(f"brute force enumeration limited to 20 features, model uses {d}")
    one = dataset.take([row])
    cache = _EncodeCache(model, one)
    pos = {f: i for i, f in enumerate(used)}
    term_mask_value = []
    for t in model.terms:
        mask = 0
        for f in t:
            mask |= 1 << pos[f]
        term_mask_value.append((mask, float(term_values(model, one, t, cache)[0])))

    v = np.zeros(1 << d)
    for mask, value in term_mask_value:
        for s in range(1 << d):
            if s & mask == mask:
                v[s] += value

    phi = np.zeros(d)
    fact = [math.factorial(i) for i in range(d + 1)]
    denom = fact[d]
    for j in range(d):
        bit = 1 << j
        others = [i for i in range(d) if i != j]
        for size in range(d):
            weight = fact[size] * fact[d - size - 1] / denom
            for subset in itertools.combinations(others, size):
                s = 0
                for i in subset:
                    s |= 1 << i
                phi[j] += weight * (v[s | bit] - v[s])
    return phi


def shap_importance(shap: ShapMatrix) -> list[tuple[str, float]]:
    """Per-feature mean absolute Shapley value, sorted descending."""
    if shap.values.size == 0:
        raise DataError("empty Shapley matrix")
    means = np.mean(np.abs(shap.values), axis=0)
    pairs = list(zip(shap.feature_names, (float(v) for v in means)))
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs
