"""Fitting, evaluating and serializing the additive surrogate model.

A fitted model holds an intercept (the mean prediction), one coefficient
table per term, and the encoders that realize each term's basis. Every
effect satisfies the empirical grid-line centering constraints, so term
values are directly interpretable as contributions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels
from .data import Dataset, validate_predictions
from .design import TermKey, assemble, sort_terms, term_key
from .encoding import Encoder, build_encoder, encode_column, encoder_from_dict, encoder_to_dict
from .errors import DataError, ModelFormatError, UndefinedRatioError
from .solver import SolverConfig, solve

MODEL_FORMAT = "midkit-model"
MODEL_VERSION = 1


@dataclass
class EffectTable:
    term: TermKey
    coef: np.ndarray  # (k,) for mains, (k_p, k_q) for pairs
    delta: np.ndarray  # matching empirical weights; dead cells have weight 0


@dataclass
class MidModel:
    feature_names: list[str]
    intercept: float
    terms: dict[TermKey, EffectTable]
    main_encoders: dict[int, Encoder]
    inter_encoders: dict[int, Encoder]
    uvr_train: float | None
    fit_meta: dict = field(default_factory=dict)

    @property
    def features(self) -> list[int]:
        """Indices of features used by at least one term, ascending."""
        used: set[int] = set()
        for t in self.terms:
            used.update(t)
        return sorted(used)

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise DataError(f"{name!r} is not a model feature") from None

    def term_label(self, term: TermKey) -> str:
        return ":".join(self.feature_names[f] for f in term)

    def resolve_term(self, spec) -> TermKey:
        """Accept a TermKey, an index sequence, or a name like "x1:x2"."""
        if isinstance(spec, str):
            key = term_key(self.feature_index(p) for p in spec.split(":"))
        else:
            key = term_key(spec)
        if key not in self.terms:
            raise DataError(f"unknown term {self.term_label(key)!r}")
        return key

    def encoder_for(self, feature: int, order: int) -> Encoder:
        encs = self.main_encoders if order == 1 else self.inter_encoders
        return encs[feature]


def default_terms(n_features: int, order: int) -> list[TermKey]:
    terms: list[TermKey] = [(j,) for j in range(n_features)]
    if order == 2:
        terms += [(p, q) for p in range(n_features) for q in range(p + 1, n_features)]
    return terms


def fit(
    dataset: Dataset,
    predictions,
    order: int = 2,
    terms=None,
    k=(25, 5),
    solver: SolverConfig | None = None,
    numeric_kind: str = "linear",
) -> MidModel:
    """Fit the additive surrogate to (features, predictions) data.

    The intercept is the prediction mean; all term coefficients come from a
    single constrained least-squares solve on the centered predictions.
    k = (k_main, k_inter) caps the number of encoding functions per feature
    for main effects and for each side of an interaction.
    """
    predictions = validate_predictions(dataset, predictions)
    if dataset.n_rows < 2:
        raise DataError("need at least 2 rows to fit")
    k_main, k_inter = int(k[0]), int(k[1])
    if k_main < 2 or k_inter < 2:
        raise DataError("k_main and k_inter must be >= 2")
    if terms is None:
        if order not in (1, 2):
            raise DataError("order must be 1 or 2")
        term_list = default_terms(len(dataset.columns), order)
    else:
        term_list = sort_terms(terms)
        for t in term_list:
            if t[-1] >= len(dataset.columns):
                raise DataError(f"term feature index {t[-1]} out of range")
        order = max(len(t) for t in term_list)

    main_feats = sorted({t[0] for t in term_list if len(t) == 1})
    pair_feats = sorted({f for t in term_list if len(t) == 2 for f in t})
    # build_encoder ignores the numeric kind for categorical and
    # small-cardinality columns, which always get indicator encoders
    main_encoders = {f: build_encoder(dataset.columns[f], k_main, kind=numeric_kind) for f in main_feats}
    inter_encoders = {f: build_encoder(dataset.columns[f], k_inter, kind=numeric_kind) for f in pair_feats}

    intercept = float(np.mean(predictions))
    y_tilde = predictions - intercept

    system = assemble(dataset, main_encoders, term_list, inter_encoders)
    config = solver or SolverConfig()
    report = solve(system, y_tilde, config)

    tables: dict[TermKey, EffectTable] = {}
    for t, sl in zip(system.terms, system.layout):
        coef = report.coefficients[sl].copy()
        delta = system.delta[sl].copy()
        if len(t) == 2:
            kp = inter_encoders[t[0]].k
            kq = inter_encoders[t[1]].k
            coef = coef.reshape(kp, kq)
            delta = delta.reshape(kp, kq)
        tables[t] = EffectTable(t, coef, delta)

    denom = float(y_tilde @ y_tilde)
    uvr_train = (report.residual_ss / denom) if denom > 0.0 else None

    fit_meta = {
        "method": report.method_used,
        "rank": report.rank,
        "residual_ss": report.residual_ss,
        "constraint_violation": report.constraint_violation,
        "kappa": report.kappa,
        "ridge_applied": report.ridge_applied,
        "n_dead_columns": report.n_dead_columns,
        "elapsed": report.elapsed,
        "k_main": k_main,
        "k_inter": k_inter,
        "order": order,
        "n_rows": dataset.n_rows,
        "numeric_kind": numeric_kind,
        "kernel_backend": kernels.BACKEND,
        "package_version": __version__,
    }
    return MidModel(
        feature_names=list(dataset.names),
        intercept=intercept,
        terms=tables,
        main_encoders=main_encoders,
        inter_encoders=inter_encoders,
        uvr_train=uvr_train,
        fit_meta=fit_meta,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class _EncodeCache:
    """Per-dataset cache of encoded columns keyed by (feature, order)."""

    def __init__(self, model: MidModel, dataset: Dataset):
        self.model = model
        self.dataset = dataset
        self._cache: dict = {}

    def get(self, feature: int, order: int):
        key = (feature, order)
        if key not in self._cache:
            name = self.model.feature_names[feature]
            if name not in self.dataset:
                raise DataError(f"dataset lacks model feature {name!r}")
            enc = self.model.encoder_for(feature, order)
            self._cache[key] = encode_column(enc, self.dataset.column(name))
        return self._cache[key]


def term_values(model: MidModel, dataset: Dataset, term: TermKey, cache: _EncodeCache | None = None):
    """Per-row effect values of one term on a dataset."""
    cache = cache or _EncodeCache(model, dataset)
    et = model.terms[term]
    if len(term) == 1:
        return kernels.eval_main(et.coef, *cache.get(term[0], 1))
    p, q = term
    return kernels.eval_pair(et.coef, *cache.get(p, 2), *cache.get(q, 2))


def predict(model: MidModel, dataset: Dataset) -> np.ndarray:
    """Surrogate predictions: intercept plus all term effects, summed in
    canonical term order."""
    cache = _EncodeCache(model, dataset)
    out = np.full(dataset.n_rows, model.intercept)
    for t in model.terms:
        out += term_values(model, dataset, t, cache)
    return out


def _points_to_columns(term: TermKey, points):
    if len(term) == 1:
        return [points]
    if isinstance(points, tuple) and len(points) == 2:
        a, b = points
        if np.ndim(a) >= 1 and np.ndim(b) >= 1 and len(a) == len(b):
            return [a, b]
    rows = list(points)
    return [[r[0] for r in rows], [r[1] for r in rows]]


def effect(model: MidModel, term, points, include_main_effects: bool = False) -> np.ndarray:
    """Evaluate one term's effect at arbitrary points.

    For a pair term, points may be a 2-tuple of parallel per-feature arrays
    or a sequence of (value_p, value_q) tuples; include_main_effects adds
    the two main effects where the model has them.
    """
    key = model.resolve_term(term)
    cols = _points_to_columns(key, points)
    order = len(key)
    encoded = [encode_column(model.encoder_for(f, order), c) for f, c in zip(key, cols)]
    et = model.terms[key]
    if order == 1:
        out = kernels.eval_main(et.coef, *encoded[0])
    else:
        out = kernels.eval_pair(et.coef, *encoded[0], *encoded[1])
        if include_main_effects:
            for f, c in zip(key, cols):
                if (f,) in model.terms:
                    enc = encode_column(model.encoder_for(f, 1), c)
                    out = out + kernels.eval_main(model.terms[(f,)].coef, *enc)
    return out


def uvr(model: MidModel, dataset: Dataset, predictions) -> float:
    """Share of prediction variation the surrogate leaves unexplained."""
    predictions = validate_predictions(dataset, predictions)
    fitted = predict(model, dataset)
    centered = predictions - predictions.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise UndefinedRatioError("predictions are constant; ratio undefined")
    resid = predictions - fitted
    return float(resid @ resid) / denom


def centering_violation(model: MidModel) -> float:
    """Worst grid-line centering residual, relative to coefficient scale.

    Zero for an exactly centered model; the fit contract keeps this below
    1e-8 for the exact (null-space) solver.
    """
    worst = 0.0
    for et in model.terms.values():
        scale = float(np.max(np.abs(et.coef)) * np.max(et.delta)) if et.coef.size else 0.0
        if scale == 0.0:
            scale = 1.0
        if et.coef.ndim == 1:
            sums = [float(et.coef @ et.delta)]
        else:
            weighted = et.coef * et.delta
            sums = list(weighted.sum(axis=1)) + list(weighted.sum(axis=0))
        worst = max(worst, max(abs(s) for s in sums) / scale)
    return worst


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _meta_for_file(fit_meta: dict) -> dict:
    out = dict(fit_meta)
    out.pop("elapsed", None)  # wall time would break byte-determinism of files
    return out


def to_dict(model: MidModel) -> dict:
    encoders = []
    for role, encs in (("main", model.main_encoders), ("interaction", model.inter_encoders)):
        for f in sorted(encs):
            d = encoder_to_dict(encs[f])
            d["role"] = role
            encoders.append(d)
    terms = []
    for t, et in model.terms.items():
        terms.append(
            {
                "features": [model.feature_names[f] for f in t],
                "shape": list(et.coef.shape),
                "coefficients": [float(v) for v in et.coef.ravel()],
                "delta": [float(v) for v in et.delta.ravel()],
            }
        )
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "features": list(model.feature_names),
        "intercept": model.intercept,
        "encoders": encoders,
        "terms": terms,
        "uvr_train": model.uvr_train,
        "fit_meta": _meta_for_file(model.fit_meta),
    }


def from_dict(payload: dict) -> MidModel:
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a midkit model file")
    version = payload.get("version")
    if version != MODEL_VERSION:
        raise ModelFormatError(
            f"model file version {version!r} is not supported (expected {MODEL_VERSION})"
        )
    try:
        names = list(payload["features"])
        index = {n: i for i, n in enumerate(names)}
        main_encoders: dict[int, Encoder] = {}
        inter_encoders: dict[int, Encoder] = {}
        for d in payload["encoders"]:
            enc = encoder_from_dict(d)
            target = main_encoders if d.get("role", "main") == "main" else inter_encoders
            target[index[enc.feature]] = enc
        terms: dict[TermKey, EffectTable] = {}
        for td in payload["terms"]:
            t = term_key(index[n] for n in td["features"])
            shape = tuple(td["shape"])
            coef = np.asarray(td["coefficients"], dtype=np.float64).reshape(shape)
            delta = np.asarray(td["delta"], dtype=np.float64).reshape(shape)
            terms[t] = EffectTable(t, coef, delta)
        return MidModel(
            feature_names=names,
            intercept=float(payload["intercept"]),
            terms=terms,
            main_encoders=main_encoders,
            inter_encoders=inter_encoders,
            uvr_train=payload.get("uvr_train"),
            fit_meta=dict(payload.get("fit_meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from exc


def save(model: MidModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(model), fh, indent=1)
        fh.write("\n")


def load(path) -> MidModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
    return from_dict(payload)
