import json

import numpy as np
import pytest

from midkit import (
    DataError,
    ModelFormatError,
    UndefinedRatioError,
    centering_violation,
    effect,
    fit,
    gen_friedman1,
    load,
    predict,
    save,
    uvr,
)
from midkit.data import Dataset, categorical_column, from_arrays, numeric_column
from midkit.model import term_values

from _systems import kkt_oracle


class TestFitBasics:
    def test_binary_feature_exact_solution(self):
        ds = Dataset((categorical_column("g", ["a", "a", "b", "b"]),))
        preds = np.array([1.0, 1.0, 3.0, 3.0])
        model = fit(ds, preds, order=1, k=(2, 2))
        assert model.intercept == pytest.approx(2.0, abs=1e-12)
        coef = model.terms[(0,)].coef
        assert coef == pytest.approx([-1.0, 1.0], abs=1e-10)
        assert model.uvr_train == pytest.approx(0.0, abs=1e-12)

    def test_constant_predictions_flagged(self):
        ds = from_arrays(["x"], [np.linspace(0, 1, 10)])
        model = fit(ds, np.full(10, 5.0), order=1, k=(3, 2))
        assert model.intercept == 5.0
        assert model.uvr_train is None
        assert np.allclose(model.terms[(0,)].coef, 0.0, atol=1e-12)
        with pytest.raises(UndefinedRatioError):
            uvr(model, ds, np.full(10, 5.0))

    def test_argument_validation(self, rng):
        ds = from_arrays(["x"], [rng.random(10)])
        y = rng.random(10)
        with pytest.raises(DataError, match="order"):
            fit(ds, y, order=3)
        with pytest.raises(DataError, match="k_main"):
            fit(ds, y, order=1, k=(1, 2))
        with pytest.raises(DataError, match="at least 2 rows"):
            fit(ds.take([0]), y[:1], order=1)
        with pytest.raises(DataError, match="out of range"):
            fit(ds, y, terms=[(2,)])

    def test_dual_encoder_sizes(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(200), rng.random(200)])
        model = fit(ds, rng.random(200), order=2, k=(9, 4))
        assert model.main_encoders[0].k == 9
        assert model.inter_encoders[0].k == 4
        assert model.terms[(0, 1)].coef.shape == (4, 4)

    def test_explicit_terms(self, rng):
        ds = from_arrays(["a", "b", "c"], [rng.random(50) for _ in range(3)])
        model = fit(ds, rng.random(50), terms=[("1"), (0,), (0, 2)], k=(3, 2))
        assert list(model.terms) == [(0,), (1,), (0, 2)]  # mains first, then pairs
        assert model.features == [0, 1, 2]


class TestIndicatorOracle:
    def make_case(self, rng, n_features=2, n=40):
        names = "abc"
        cols = tuple(
            categorical_column(f"c{f}", [names[i] for i in rng.integers(0, 3, n)])
            for f in range(n_features)
        )
        return Dataset(cols), rng.standard_normal(n)

    def test_effects_match_dense_kkt_oracle(self):
        rng = np.random.default_rng(5)
        from midkit.design import assemble
        from midkit.encoding import build_encoder

        for n_features in (2, 2, 3, 3, 2):
            ds, y = self.make_case(rng, n_features=n_features, n=60)
            model = fit(ds, y, order=2, k=(3, 3))
            feats = range(n_features)
            encs = {f: build_encoder(ds.columns[f], 3) for f in feats}
            terms = [(f,) for f in feats] + [(p, q) for p in feats for q in feats if p < q]
            system = assemble(ds, encs, terms, encs)
            beta = kkt_oracle(system, y - y.mean())
            fitted_model = predict(model, ds)
            fitted_oracle = model.intercept + system.design @ beta
            assert np.max(np.abs(fitted_model - fitted_oracle)) <= 1e-8

    def test_conditional_mean_given_subsets_is_zero(self):
        # grid-line centering makes E[f_J | one coordinate] vanish empirically
        rng = np.random.default_rng(9)
        ds, y = self.make_case(rng)
        model = fit(ds, y, order=2, k=(3, 3))
        pair_vals = term_values(model, ds, (0, 1))
        for f in (0, 1):
            codes = ds.columns[f].codes
            for level in np.unique(codes):
                group = pair_vals[codes == level]
                scale = max(1.0, np.abs(pair_vals).max())
                assert abs(group.sum()) <= 1e-8 * scale * len(group)
        for t in [(0,), (1,)]:
            vals = term_values(model, ds, t)
            assert abs(vals.sum()) <= 1e-8 * max(1.0, np.abs(vals).max()) * len(vals)


class TestCentering:
    def test_fitted_models_satisfy_grid_line_centering(self, rng):
        for order in (1, 2):
            ds = from_arrays(["a", "b"], [rng.random(120), rng.random(120)])
            y = rng.standard_normal(120)
            model = fit(ds, y, order=order, k=(6, 3))
            assert centering_violation(model) <= 1e-8

    def test_friedman_model_centered(self, friedman):
        _, _, model = friedman
        assert centering_violation(model) <= 1e-8


class TestPredict:
    def test_additivity_matches_manual_accumulation(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(60), rng.random(60)])
        model = fit(ds, rng.random(60), order=2, k=(4, 3))
        manual = np.full(ds.n_rows, model.intercept)
        for t in model.terms:
            manual += term_values(model, ds, t)
        assert np.array_equal(predict(model, ds), manual)

    def test_residual_ss_consistent_with_report(self, friedman):
        ds, y, model = friedman
        resid = y - predict(model, ds)
        rss = float(resid @ resid)
        assert rss == pytest.approx(model.fit_meta["residual_ss"], rel=1e-9)

    def test_single_effect_model_at_knots(self, rng):
        values = rng.random(80)
        ds = from_arrays(["x"], [values])
        y = 3.0 * values
        model = fit(ds, y, order=1, k=(5, 2))
        enc = model.main_encoders[0]
        at_knots = effect(model, (0,), enc.grid)
        one = from_arrays(["x"], [enc.grid])
        assert np.allclose(predict(model, one), model.intercept + at_knots, atol=1e-12)

    def test_missing_column_rejected(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(30), rng.random(30)])
        model = fit(ds, rng.random(30), order=1, k=(3, 2))
        with pytest.raises(DataError, match="lacks model feature"):
            predict(model, from_arrays(["a"], [rng.random(5)]))


class TestEffect:
    def test_weighted_mean_zero_over_training_values(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(100), rng.random(100)])
        model = fit(ds, rng.random(100), order=1, k=(6, 2))
        vals = term_values(model, ds, (0,))
        assert abs(vals.sum()) <= 1e-8 * max(1.0, np.abs(vals).max()) * len(vals)

    def test_zero_coefficient_interaction_gives_zeros(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(50), rng.random(50)])
        model = fit(ds, rng.random(50), order=2, k=(3, 2))
        model.terms[(0, 1)].coef[:] = 0.0
        vals = effect(model, "a:b", (rng.random(7), rng.random(7)))
        assert np.array_equal(vals, np.zeros(7))

    def test_points_as_tuples_or_columns(self, friedman):
        _, _, model = friedman
        xs = np.array([0.2, 0.5, 0.8])
        ys = np.array([0.3, 0.6, 0.9])
        a = effect(model, "x1:x2", (xs, ys))
        b = effect(model, "x1:x2", list(zip(xs, ys)))
        assert np.array_equal(a, b)

    def test_include_main_effects(self, friedman):
        _, _, model = friedman
        xs = np.array([0.2, 0.5])
        ys = np.array([0.7, 0.1])
        combined = effect(model, "x1:x2", (xs, ys), include_main_effects=True)
        parts = (
            effect(model, "x1:x2", (xs, ys))
            + effect(model, "x1", xs)
            + effect(model, "x2", ys)
        )
        assert np.allclose(combined, parts, atol=1e-12)

    def test_unknown_term(self, friedman):
        _, _, model = friedman
        with pytest.raises(DataError, match="not a model feature"):
            effect(model, "zz", [0.1])


class TestOptimality:
    def test_no_feasible_coordinate_perturbation_improves_rss(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(40), rng.random(40)])
        y = rng.standard_normal(40)
        model = fit(ds, y, order=1, k=(4, 2))
        from midkit.design import assemble

        system = assemble(ds, model.main_encoders, [(0,), (1,)])
        beta = np.concatenate([model.terms[(0,)].coef, model.terms[(1,)].coef])
        y_t = y - model.intercept
        base_rss = float(np.sum((y_t - system.design @ beta) ** 2))
        m_rows = system.constraints
        proj = np.eye(beta.size) - m_rows.T @ np.linalg.pinv(m_rows @ m_rows.T) @ m_rows
        for j in range(beta.size):
            for sign in (-1.0, 1.0):
                perturbed = beta.copy()
                perturbed[j] += sign * 1e-3
                feasible = proj @ perturbed
                rss = float(np.sum((y_t - system.design @ feasible) ** 2))
                assert rss >= base_rss - 1e-12


class TestUvr:
    def test_training_value_matches_stored(self, friedman):
        ds, y, model = friedman
        assert uvr(model, ds, y) == pytest.approx(model.uvr_train, abs=1e-12)

    def test_affine_invariance_under_refit(self, rng):
        ds = from_arrays(["a", "b"], [rng.random(150), rng.random(150)])
        y = rng.standard_normal(150) + 2.0
        m1 = fit(ds, y, order=2, k=(5, 3))
        a, b = -3.7, 11.0
        m2 = fit(ds, a * y + b, order=2, k=(5, 3))
        assert uvr(m2, ds, a * y + b) == pytest.approx(uvr(m1, ds, y), rel=1e-9)

    def test_held_out_friedman(self, friedman):
        _, _, model = friedman
        test, y_test = gen_friedman1(2000, seed=43)
        assert uvr(model, test, y_test) <= 0.05


class TestSerialization:
    def test_round_trip_bit_identical_predictions(self, tmp_path, friedman):
        ds, _, model = friedman
        path = tmp_path / "model.json"
        save(model, path)
        back = load(path)
        sample = ds.take(range(0, 1000))
        assert np.array_equal(predict(model, sample), predict(back, sample))

    def test_round_trip_with_categoricals(self, tmp_path, rng):
        ds = Dataset(
            (
                numeric_column("u", rng.random(60)),
                categorical_column("c", [("x", "y", "z")[i] for i in rng.integers(0, 3, 60)]),
            )
        )
        model = fit(ds, rng.random(60), order=2, k=(4, 3))
        path = tmp_path / "m.json"
        save(model, path)
        back = load(path)
        assert np.array_equal(predict(model, ds), predict(back, ds))

    def test_future_version_rejected(self, tmp_path, friedman):
        _, _, model = friedman
        path = tmp_path / "m.json"
        save(model, path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelFormatError, match="version"):
            load(path)

    def test_corrupt_file_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError, match="corrupt"):
            load(path)

    def test_fit_meta_contents(self, tmp_path, friedman):
        _, _, model = friedman
        path = tmp_path / "m.json"
        save(model, path)
        meta = json.loads(path.read_text())["fit_meta"]
        assert meta["method"] == "nullspace_svd"
        assert meta["k_main"] == 25 and meta["k_inter"] == 5
        assert "elapsed" not in meta  # byte determinism of the file
