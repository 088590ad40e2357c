"""Command-line front end.

Subcommands cover the whole pipeline: dataset generation, fitting, effect
and curve export (CSV/JSON/SVG), importance, breakdowns, ICE, surrogate
Shapley values, partial dependence, scenario simulations and the solver
microbenchmark. Every tabular output starts with a one-line JSON metadata
comment; exit codes: 0 ok, 2 usage error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import sys

import numpy as np

from . import __version__, svg
from .data import (
    eval_builtin,
    format_float,
    gen_circle,
    gen_correlated_pair,
    gen_friedman1,
    load_csv,
    write_csv,
    RNG_ALGORITHM,
)
from .design import assemble
from .encoding import build_encoder
from .errors import DataError, MidkitError, NumericalError, UndefinedRatioError
from .interpret import breakdown, ice, importance, mid_shapley, shap_importance
from .model import MidModel, effect, fit, load, predict, save, uvr
from .pdp import h_statistic, pd_decompose, pd_values
from .solver import METHODS, SolverConfig, solve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

GENERATORS = ("friedman1", "correlated_pair", "circle")
SCENARIOS = ("friedman", "stability")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _meta(args, **extra) -> dict:
    meta = {
        "tool": "midkit",
        "version": __version__,
        "command": shlex.join(["midkit"] + list(args._argv)),
    }
    meta.update(extra)
    return meta


def _write_table(path, meta: dict, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, float) else v for v in row]
            )


def _write_json(path, meta: dict, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"meta": meta, **payload}, fh, indent=1)
        fh.write("\n")


def _write_svg(path, panels, meta) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg.render_document(panels, meta))


def _parse_k(text: str) -> tuple[int, int]:
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise DataError(f"cannot parse k value {text!r}; expected e.g. 25,5") from None
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) != 2:
        raise DataError(f"k takes one or two integers, got {text!r}")
    return parts[0], parts[1]


def _sidecar_path(out: str) -> str:
    return out + ".meta.json"


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    params = {"generator": args.generator, "n": args.n, "seed": args.seed, "rng": RNG_ALGORITHM}
    if args.generator == "friedman1":
        ds, preds = gen_friedman1(args.n, args.seed, args.noise_sd)
        params["noise_sd"] = args.noise_sd
    elif args.generator == "correlated_pair":
        ds = gen_correlated_pair(args.n, args.seed)
        preds = None
        if args.builtin:
            preds = eval_builtin(args.builtin, ds)
            params["builtin"] = args.builtin
    else:
        ds, preds = gen_circle(args.n, args.d, args.seed)
        params["d"] = args.d
    write_csv(args.out, ds, preds, prediction_column=args.pred_col)
    with open(_sidecar_path(args.out), "w", encoding="utf-8") as fh:
        json.dump(_meta(args, **params), fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} ({ds.n_rows} rows) and {_sidecar_path(args.out)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _fit_from_args(data_path, pred_col, order, k, method, kappa):
    ds, preds = load_csv(data_path, pred_col)
    config = SolverConfig(method=method, kappa=kappa)
    model = fit(ds, preds, order=order, k=k, solver=config)
    sidecar = _sidecar_path(data_path)
    if os.path.exists(sidecar):
        try:
            with open(sidecar, "r", encoding="utf-8") as fh:
                model.fit_meta["data_provenance"] = json.load(fh)
        except (OSError, json.JSONDecodeError):
            pass
    return ds, preds, model


def _print_fit_summary(model: MidModel) -> None:
    mains = sum(1 for t in model.terms if len(t) == 1)
    pairs = sum(1 for t in model.terms if len(t) == 2)
    print(f"Intercept: {model.intercept:.6g}")
    print(f"Main effect terms: {mains}")
    print(f"Interaction terms: {pairs}")
    if model.uvr_train is None:
        print("Uninterpreted Variation Ratio: undefined (constant predictions)")
    else:
        print(f"Uninterpreted Variation Ratio: {model.uvr_train:.7g}")
    meta = model.fit_meta
    rank = meta.get("rank")
    rank_text = "not determined" if rank is None else str(rank)
    print(
        f"Solver: {meta['method']} (rank {rank_text}), "
        f"constraint violation {meta['constraint_violation']:.3g}, "
        f"elapsed {meta['elapsed']:.3f}s"
    )


def cmd_fit(args) -> int:
    k = _parse_k(args.k)
    _, _, model = _fit_from_args(args.data, args.pred_col, args.order, k, args.method, args.kappa)
    save(model, args.out)
    _print_fit_summary(model)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# effects
# ---------------------------------------------------------------------------


def _term_grid(model: MidModel, feature: int, order: int, grid_size: int):
    enc = model.encoder_for(feature, order)
    if enc.is_categorical:
        return list(enc.levels)
    if enc.kind == "indicator":
        return list(enc.grid)
    return np.linspace(enc.vmin, enc.vmax, grid_size)


def cmd_effects(args) -> int:
    model = load(args.model)
    meta = _meta(args, grid_size=args.grid_size, include_main_effects=args.include_main_effects)
    results = []
    for spec in args.term:
        key = model.resolve_term(spec)
        label = model.term_label(key)
        if len(key) == 1:
            grid = _term_grid(model, key[0], 1, args.grid_size or 101)
            values = effect(model, key, grid)
            results.append((key, label, [grid], values))
        else:
            size = args.grid_size or 41
            g1 = _term_grid(model, key[0], 2, size)
            g2 = _term_grid(model, key[1], 2, size)
            cols1 = [a for a in g1 for _ in g2]
            cols2 = [b for _ in g1 for b in g2]
            values = effect(
                model, key, (cols1, cols2), include_main_effects=args.include_main_effects
            )
            results.append((key, label, [g1, g2], values))

    if args.format == "csv":
        if len(results) == 1:
            key, label, grids, values = results[0]
            if len(key) == 1:
                header = [label, "effect"]
                rows = [[g, float(v)] for g, v in zip(grids[0], values)]
            else:
                n2 = len(grids[1])
                header = [model.feature_names[key[0]], model.feature_names[key[1]], "effect"]
                rows = [
                    [grids[0][i // n2], grids[1][i % n2], float(v)] for i, v in enumerate(values)
                ]
        else:
            header = ["term", "value_1", "value_2", "effect"]
            rows = []
            for key, label, grids, values in results:
                if len(key) == 1:
                    rows += [[label, g, "", float(v)] for g, v in zip(grids[0], values)]
                else:
                    n2 = len(grids[1])
                    rows += [
                        [label, grids[0][i // n2], grids[1][i % n2], float(v)]
                        for i, v in enumerate(values)
                    ]
        _write_table(args.out, meta, header, rows)
    elif args.format == "json":
        payload = []
        for key, label, grids, values in results:
            entry = {"term": label, "effect": [float(v) for v in values]}
            entry["grid"] = [list(map(_jsonable, g)) for g in grids]
            payload.append(entry)
        _write_json(args.out, meta, {"effects": payload})
    else:
        panels = []
        for key, label, grids, values in results:
            if len(key) == 1:
                if isinstance(grids[0], list):  # categorical levels
                    panels.append(
                        svg.bar_panel(f"term-{label}", f"effect: {label}", grids[0], values)
                    )
                else:
                    panels.append(
                        svg.line_panel(
                            f"term-{label}",
                            f"effect: {label}",
                            grids[0],
                            [(label, values)],
                            xlabel=label,
                            ylabel="effect",
                        )
                    )
            else:
                z = np.asarray(values).reshape(len(grids[0]), len(grids[1]))
                panels.append(
                    svg.heatmap_panel(
                        f"term-{label}",
                        f"effect: {label}",
                        [_short(g) for g in grids[1]],
                        [_short(g) for g in grids[0]],
                        z,
                        xlabel=model.feature_names[key[1]],
                        ylabel=model.feature_names[key[0]],
                    )
                )
        _write_svg(args.out, panels, meta)
    print(f"wrote {args.out}")
    return EXIT_OK


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return str(v)


def _short(v):
    return f"{v:.3g}" if isinstance(v, (float, np.floating)) else str(v)


# ---------------------------------------------------------------------------
# importance
# ---------------------------------------------------------------------------


def cmd_importance(args) -> int:
    model = load(args.model)
    ds, _ = load_csv(args.data, args.pred_col)
    table = importance(model, ds)
    meta = _meta(args)
    if args.format == "csv":
        _write_table(
            args.out,
            meta,
            ["term", "importance", "rank"],
            [[r.label, r.importance, r.rank] for r in table],
        )
    elif args.format == "json":
        _write_json(
            args.out,
            meta,
            {"importance": [{"term": r.label, "importance": r.importance, "rank": r.rank} for r in table]},
        )
    else:
        if args.style == "heatmap":
            names = [model.feature_names[f] for f in model.features]
            idx = {f: i for i, f in enumerate(model.features)}
            z = np.full((len(names), len(names)), np.nan)
            for r in table:
                if len(r.term) == 1:
                    i = idx[r.term[0]]
                    z[i, i] = r.importance
                else:
                    i, j = idx[r.term[0]], idx[r.term[1]]
                    z[i, j] = r.importance
                    z[j, i] = r.importance
            panels = [svg.heatmap_panel("importance-heatmap", "term importance", names, names, z)]
        else:
            top = table.rows[: args.max_bars]
            panels = [
                svg.bar_panel(
                    "importance", "term importance", [r.label for r in top], [r.importance for r in top]
                )
            ]
        _write_svg(args.out, panels, meta)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# breakdown
# ---------------------------------------------------------------------------


def cmd_breakdown(args) -> int:
    model = load(args.model)
    ds, _ = load_csv(args.data, args.pred_col)
    result = breakdown(model, ds, args.row)
    meta = _meta(args, row=args.row, intercept=result.intercept, total=result.total)
    if args.format == "csv":
        rows = [["(intercept)", "", float(result.cumulative[0])]]
        for entry, cum in zip(result.entries, result.cumulative[1:]):
            rows.append([entry.label, entry.contribution, float(cum)])
        _write_table(args.out, meta, ["term", "contribution", "cumulative"], rows)
    elif args.format == "json":
        _write_json(
            args.out,
            meta,
            {
                "intercept": result.intercept,
                "total": result.total,
                "contributions": [
                    {"term": e.label, "contribution": e.contribution} for e in result.entries
                ],
                "cumulative": [float(c) for c in result.cumulative],
            },
        )
    else:
        labels = [e.label for e in result.entries]
        panels = [
            svg.waterfall_panel(
                "breakdown", f"prediction breakdown (row {args.row})", labels, result.cumulative
            )
        ]
        _write_svg(args.out, panels, meta)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ice
# ---------------------------------------------------------------------------


def _parse_rows(spec: str | None, n: int):
    if spec is None:
        return None
    try:
        if ":" in spec:
            start, stop = spec.split(":")
            return range(int(start or 0), min(int(stop or n), n))
        return [int(spec)]
    except ValueError:
        raise DataError(f"cannot parse row selection {spec!r}") from None


def cmd_ice(args) -> int:
    model = load(args.model)
    ds, _ = load_csv(args.data, args.pred_col)
    rows = _parse_rows(args.rows, ds.n_rows)
    if rows is not None:
        ds = ds.take(list(rows))
    curves = ice(
        model,
        ds,
        args.variable,
        grid_size=args.grid_size,
        centered=args.centered,
        term_restrict=args.term,
    )
    meta = _meta(
        args,
        variable=args.variable,
        centered=args.centered,
        grid_size=args.grid_size,
        term=args.term,
        n_curves=int(curves.curves.shape[0]),
    )
    grid_out = [_jsonable(g) for g in curves.grid]
    if args.format == "csv":
        rows_out = []
        for i in range(curves.curves.shape[0]):
            for g, v in zip(grid_out, curves.curves[i]):
                rows_out.append([i, g, float(v)])
        _write_table(args.out, meta, ["row", args.variable, "value"], rows_out)
    elif args.format == "json":
        _write_json(
            args.out,
            meta,
            {"grid": grid_out, "curves": [[float(v) for v in row] for row in curves.curves]},
        )
    else:
        if isinstance(curves.grid, list):
            x = np.arange(len(curves.grid))
        else:
            x = curves.grid
        series = [("", curves.curves[i]) for i in range(curves.curves.shape[0])]
        title = f"ICE: {args.variable}" + (" (centered)" if args.centered else "")
        panels = [svg.line_panel("ice", title, x, series, xlabel=args.variable, ylabel="prediction")]
        _write_svg(args.out, panels, meta)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# shap
# ---------------------------------------------------------------------------


def cmd_shap(args) -> int:
    model = load(args.model)
    ds, _ = load_csv(args.data, args.pred_col)
    shap = mid_shapley(model, ds)
    preds = predict(model, ds)
    meta = _meta(args, intercept=shap.intercept, features=shap.feature_names)
    if args.format == "csv":
        header = ["row"] + shap.feature_names + ["prediction"]
        rows = [
            [i] + [float(v) for v in shap.values[i]] + [float(preds[i])]
            for i in range(shap.values.shape[0])
        ]
        _write_table(args.out, meta, header, rows)
    elif args.format == "json":
        _write_json(
            args.out,
            meta,
            {
                "intercept": shap.intercept,
                "features": shap.feature_names,
                "values": [[float(v) for v in row] for row in shap.values],
                "predictions": [float(p) for p in preds],
            },
        )
    else:
        pairs = shap_importance(shap)
        panels = [
            svg.bar_panel(
                "shap-importance",
                "mean |shapley value| by feature",
                [p[0] for p in pairs],
                [p[1] for p in pairs],
            )
        ]
        _write_svg(args.out, panels, meta)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# pd
# ---------------------------------------------------------------------------


def cmd_pd(args) -> int:
    model = load(args.model)
    ds, _ = load_csv(args.data, args.pred_col)
    meta = _meta(args, grid_size=args.grid_size)
    if args.h:
        rows = []
        for pair_spec in args.h:
            names = pair_spec.split(",") if "," in pair_spec else pair_spec.split(":")
            if len(names) != 2:
                raise DataError(f"--h takes feature pairs like x1,x2; got {pair_spec!r}")
            rows.append([names[0], names[1], h_statistic(model, ds, names)])
        if args.format == "json":
            _write_json(
                args.out,
                meta,
                {"h_statistic": [{"features": [a, b], "h2": v} for a, b, v in rows]},
            )
        else:
            _write_table(args.out, meta, ["feature_a", "feature_b", "h2"], rows)
        print(f"wrote {args.out}")
        return EXIT_OK

    names = args.features.split(",")
    eff = pd_decompose(model, ds, names, grid_size=args.grid_size)
    raw = pd_values(model, ds, names, grid=eff.grid)
    if len(names) == 1:
        grid = [_jsonable(g) for g in eff.grid[0]]
        if args.format == "csv":
            rows = [
                [g, float(p), float(c)]
                for g, p, c in zip(grid, raw.values, eff.values)
            ]
            _write_table(args.out, meta, [names[0], "pd", "effect"], rows)
        elif args.format == "json":
            _write_json(
                args.out,
                meta,
                {
                    "features": names,
                    "grid": grid,
                    "pd": [float(v) for v in raw.values],
                    "effect": [float(v) for v in eff.values],
                },
            )
        else:
            x = np.arange(len(grid)) if isinstance(eff.grid[0], list) else np.asarray(eff.grid[0])
            panels = [
                svg.line_panel(
                    "pd",
                    f"partial dependence: {names[0]}",
                    x,
                    [("pd", raw.values), ("centered effect", eff.values)],
                    xlabel=names[0],
                )
            ]
            _write_svg(args.out, panels, meta)
    else:
        g1 = [_jsonable(g) for g in eff.grid[0]]
        g2 = [_jsonable(g) for g in eff.grid[1]]
        if args.format == "csv":
            rows = []
            for i, a in enumerate(g1):
                for j, b in enumerate(g2):
                    rows.append([a, b, float(raw.values[i, j]), float(eff.values[i, j])])
            _write_table(args.out, meta, [names[0], names[1], "pd", "effect"], rows)
        elif args.format == "json":
            _write_json(
                args.out,
                meta,
                {
                    "features": names,
                    "grid": [g1, g2],
                    "pd": [[float(v) for v in row] for row in raw.values],
                    "effect": [[float(v) for v in row] for row in eff.values],
                },
            )
        else:
            panels = [
                svg.heatmap_panel(
                    "pd",
                    f"pd effect: {names[0]}:{names[1]}",
                    [_short(v) for v in g2],
                    [_short(v) for v in g1],
                    eff.values,
                    xlabel=names[1],
                    ylabel=names[0],
                )
            ]
            _write_svg(args.out, panels, meta)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _simulate_friedman(args, outdir: str) -> dict:
    n = args.n or 2000
    train, y_train = gen_friedman1(n, args.seed, noise_sd=0.0)
    test, y_test = gen_friedman1(n, args.seed + 1, noise_sd=0.0)
    train_path = os.path.join(outdir, "train.csv")
    test_path = os.path.join(outdir, "test.csv")
    write_csv(train_path, train, y_train)
    write_csv(test_path, test, y_test)
    model = fit(train, y_train, order=2, k=(25, 5))
    save(model, os.path.join(outdir, "model.json"))
    report = {
        "scenario": "friedman",
        "n": n,
        "seed": args.seed,
        "uvr_train": model.uvr_train,
        "uvr_test": uvr(model, test, y_test),
    }
    print(f"uvr_train: {report['uvr_train']:.6g}")
    print(f"uvr_test: {report['uvr_test']:.6g}")
    return report


def _simulate_stability(args, outdir: str) -> dict:
    n = args.n or 200
    ds = gen_correlated_pair(n, args.seed)
    ya = eval_builtin("stability_a", ds)
    yb = eval_builtin("stability_b", ds)
    write_csv(os.path.join(outdir, "data_a.csv"), ds, ya)
    write_csv(os.path.join(outdir, "data_b.csv"), ds, yb)
    model_a = fit(ds, ya, order=2, k=(25, 5))
    model_b = fit(ds, yb, order=2, k=(25, 5))
    save(model_a, os.path.join(outdir, "model_a.json"))
    save(model_b, os.path.join(outdir, "model_b.json"))

    fa = lambda d: eval_builtin("stability_a", d)  # noqa: E731
    fb = lambda d: eval_builtin("stability_b", d)  # noqa: E731
    rows = []
    for feat in ds.names:
        col = ds.column(feat).values
        grid = np.linspace(col.min(), col.max(), 101)
        mid_div = float(
            np.max(np.abs(effect(model_a, feat, grid) - effect(model_b, feat, grid)))
        )
        pa = pd_decompose(fa, ds, feat, grid_size=51)
        pb = pd_decompose(fb, ds, feat, grid_size=51)
        diff = np.abs(pa.values - pb.values)
        rows.append([feat, mid_div, float(diff[0]), float(diff[-1])])
        print(
            f"{feat}: MID main-effect divergence (sup) {mid_div:.4f}; "
            f"PD divergence at extremes {diff[0]:.4f} / {diff[-1]:.4f}"
        )
    _write_table(
        os.path.join(outdir, "divergence.csv"),
        _meta(args, scenario="stability"),
        ["feature", "mid_sup_divergence", "pd_divergence_low", "pd_divergence_high"],
        rows,
    )
    return {
        "scenario": "stability",
        "n": n,
        "seed": args.seed,
        "divergence": [
            {"feature": r[0], "mid_sup": r[1], "pd_low": r[2], "pd_high": r[3]} for r in rows
        ],
    }


def cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.scenario == "friedman":
        report = _simulate_friedman(args, args.out)
    else:
        report = _simulate_stability(args, args.out)
    with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump({"meta": _meta(args), **report}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {args.out}/report.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def bench_param_count(d: int, k_main: int, k_inter: int) -> int:
    """Column count of a full order-2 system over d continuous features."""
    return k_main * d + k_inter * k_inter * d * (d - 1) // 2


def run_bench(n: int, d: int, k: tuple[int, int], methods: list[str], reps: int, seed: int = 0):
    """Time each solver on one assembled ring-label system.

    Effects are checked to agree across methods (within 1e-3 of the
    prediction range) before any timing is reported.
    """
    k_main, k_inter = k
    m = bench_param_count(d, k_main, k_inter)
    if n * m > 10**8:
        raise DataError(f"n*m = {n * m:.3g} exceeds the 1e8 memory guard")
    ds, labels = gen_circle(n, d, seed)
    y = labels - labels.mean()
    feats = list(range(d))
    main_enc = {f: build_encoder(ds.columns[f], k_main) for f in feats}
    inter_enc = {f: build_encoder(ds.columns[f], k_inter) for f in feats}
    terms = [(f,) for f in feats] + [(p, q) for p in feats for q in feats if p < q]
    system = assemble(ds, main_enc, terms, inter_enc)
    if system.n_cols != m:
        raise NumericalError(
            f"assembled {system.n_cols} columns, formula says {m}; "
            "a feature collapsed below the requested encoder size"
        )

    scale = float(labels.max() - labels.min())
    tol = 1e-3 * scale
    reference = None
    results = []
    for method in methods:
        config = SolverConfig(method=method)
        report = solve(system, y, config)
        fitted_terms = [system.design[:, sl] @ report.coefficients[sl] for sl in system.layout]
        if reference is None:
            reference = fitted_terms
        else:
            worst = max(
                float(np.max(np.abs(a - b))) for a, b in zip(reference, fitted_terms)
            )
            if worst > tol:
                raise NumericalError(
                    f"method {method} disagrees with {methods[0]} by {worst:.3g} "
                    f"(tolerance {tol:.3g}); timings not reported"
                )
        times = [report.elapsed]
        for _ in range(reps - 1):
            times.append(solve(system, y, config).elapsed)
        results.append(
            {
                "method": method,
                "n": n,
                "d": d,
                "m": m,
                "reps": reps,
                "mean_ms": float(np.mean(times) * 1000),
                "min_ms": float(np.min(times) * 1000),
            }
        )
    return results


def cmd_bench(args) -> int:
    k = _parse_k(args.k)
    methods = args.methods.split(",")
    for method in methods:
        if method not in METHODS:
            raise DataError(f"unknown method {method!r}; valid: {METHODS}")
    results = run_bench(args.n, args.d, k, methods, args.reps, args.seed)
    print(f"n={args.n} d={args.d} k={k[0]},{k[1]} m={results[0]['m']} reps={args.reps}")
    print(f"{'method':<18}{'mean_ms':>12}{'min_ms':>12}")
    for r in results:
        print(f"{r['method']:<18}{r['mean_ms']:>12.1f}{r['min_ms']:>12.1f}")
    if args.out:
        _write_table(
            args.out,
            _meta(args),
            ["method", "n", "d", "m", "reps", "mean_ms", "min_ms"],
            [[r["method"], r["n"], r["d"], r["m"], r["reps"], r["mean_ms"], r["min_ms"]] for r in results],
        )
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="midkit",
        description="Learn a global additive surrogate of a black-box model and query it.",
    )
    parser.add_argument("--version", action="version", version=f"midkit {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset deterministically")
    p.add_argument("generator", choices=GENERATORS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--d", type=int, default=4, help="feature count (circle only)")
    p.add_argument("--builtin", choices=("stability_a", "stability_b", "friedman1"))
    p.add_argument("--pred-col", default="yhat")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit the additive surrogate to a CSV dataset")
    p.add_argument("data")
    p.add_argument("--pred-col", required=True)
    p.add_argument("--order", type=int, choices=(1, 2), default=2,
                   help="decomposition order; orders above 2 are out of scope")
    p.add_argument("--k", default="25,5", help="encoding sizes: k_main,k_inter")
    p.add_argument("--method", choices=METHODS, default="nullspace_svd")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("effects", help="export fitted effect grids")
    p.add_argument("model")
    p.add_argument("--term", action="append", required=True, help="term like x4 or x1:x2 (repeatable)")
    p.add_argument("--grid-size", type=int, default=None)
    p.add_argument("--include-main-effects", action="store_true")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_effects)

    p = sub.add_parser("importance", help="term importance over a dataset")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--pred-col", required=True)
    p.add_argument("--style", choices=("bar", "heatmap"), default="bar")
    p.add_argument("--max-bars", type=int, default=20)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("breakdown", help="decompose one prediction into term contributions")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--pred-col", required=True)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_breakdown)

    p = sub.add_parser("ice", help="ceteris-paribus curves for one feature")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--pred-col", required=True)
    p.add_argument("--variable", required=True)
    p.add_argument("--grid-size", type=int, default=41)
    p.add_argument("--centered", action="store_true")
    p.add_argument("--term", default=None, help="restrict to one term's sweep")
    p.add_argument("--rows", default=None, help="row selection like 0:100")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ice)

    p = sub.add_parser("shap", help="surrogate Shapley value matrix")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--pred-col", required=True)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_shap)

    p = sub.add_parser("pd", help="partial dependence of the fitted surrogate")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--pred-col", required=True)
    p.add_argument("--features", default=None, help="one or two features: x1 or x1,x2")
    p.add_argument("--h", action="append", default=None, help="emit the H statistic for a pair (repeatable)")
    p.add_argument("--grid-size", type=int, default=51)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pd)

    p = sub.add_parser("simulate", help="run a full scenario end to end")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="solver microbenchmark on generated ring-label data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", default="25,5")
    p.add_argument("--methods", default="nullspace_svd,penalty,normal_cholesky")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._argv = argv
    if args.subcommand == "pd" and not args.h and not args.features:
        print("error: pd needs --features or --h", file=sys.stderr)
        return EXIT_USAGE
    if args.subcommand == "bench" and args.reps < 1:
        print("error: --reps must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UndefinedRatioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MidkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
