import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from midkit import DataError, UnknownLevelError, build_encoder, encode
from midkit.data import categorical_column, numeric_column
from midkit.encoding import Encoder, encode_column, encoder_from_dict, encoder_to_dict


def linear_encoder(knots):
    knots = np.asarray(knots, dtype=np.float64)
    return Encoder("x", "linear", grid=knots, vmin=float(knots[0]), vmax=float(knots[-1]))


class TestBuildRules:
    def test_categorical_is_indicator(self):
        col = categorical_column("c", ["a", "b", "c", "a"])
        enc = build_encoder(col, k_max=25)
        assert enc.kind == "indicator" and enc.k == 3
        assert enc.levels == ("a", "b", "c")

    def test_continuous_gets_linear_with_range_knots(self, rng):
        col = numeric_column("u", rng.random(500))
        enc = build_encoder(col, k_max=25)
        assert enc.kind == "linear" and enc.k == 25
        assert enc.grid[0] == col.values.min()
        assert enc.grid[-1] == col.values.max()
        assert np.all(np.diff(enc.grid) > 0)

    def test_small_cardinality_numeric_is_indicator(self):
        col = numeric_column("x", [1.0, 2.0, 2.0, 7.0, 7.0, 9.0])
        enc = build_encoder(col, k_max=25)
        assert enc.kind == "indicator" and enc.k == 4

    def test_constant_column_degenerates_to_indicator(self):
        col = numeric_column("x", [3.0] * 10)
        enc = build_encoder(col, k_max=5, kind="linear")
        assert enc.kind == "indicator" and enc.k == 1

    def test_duplicate_quantiles_collapse(self):
        values = np.concatenate([np.zeros(90), np.linspace(1, 2, 30)])
        col = numeric_column("x", values)
        enc = build_encoder(col, k_max=10)
        assert enc.kind == "linear"
        assert enc.k < 10
        assert np.all(np.diff(enc.grid) > 0)

    def test_step_kind(self, rng):
        col = numeric_column("u", rng.random(300))
        enc = build_encoder(col, k_max=10, kind="step")
        assert enc.kind == "step"
        assert enc.k == 10 and len(enc.grid) == 9

    def test_invalid_args(self, rng):
        col = numeric_column("u", rng.random(50))
        with pytest.raises(DataError):
            build_encoder(col, k_max=1)
        with pytest.raises(DataError):
            build_encoder(col, k_max=5, kind="spline")


class TestEncodeExamples:
    def test_linear_midpoint(self):
        enc = linear_encoder([0.0, 0.5, 1.0])
        assert np.allclose(encode(enc, 0.25), [0.5, 0.5, 0.0], atol=1e-15)

    def test_linear_constant_extrapolation(self):
        enc = linear_encoder([0.0, 0.5, 1.0])
        assert np.array_equal(encode(enc, -3.0), [1.0, 0.0, 0.0])
        assert np.array_equal(encode(enc, 42.0), [0.0, 0.0, 1.0])

    def test_indicator_one_hot(self):
        enc = Encoder("c", "indicator", levels=("a", "b", "c"))
        assert np.array_equal(encode(enc, "b"), [0.0, 1.0, 0.0])

    def test_unknown_level_names_level(self):
        enc = Encoder("c", "indicator", levels=("a", "b"))
        with pytest.raises(UnknownLevelError, match="'z'"):
            encode(enc, "z")

    def test_step_half_open_intervals(self):
        enc = Encoder("x", "step", grid=np.array([1.0, 2.0]), vmin=0.0, vmax=3.0)
        assert np.array_equal(encode(enc, 0.5), [1, 0, 0])
        assert np.array_equal(encode(enc, 1.0), [0, 1, 0])  # boundary joins the right bin
        assert np.array_equal(encode(enc, 1.99), [0, 1, 0])
        assert np.array_equal(encode(enc, 2.0), [0, 0, 1])

    def test_linear_at_knots_is_one_hot(self):
        knots = [0.0, 0.3, 0.7, 1.0]
        enc = linear_encoder(knots)
        for i, knot in enumerate(knots):
            w = encode(enc, knot)
            assert w[i] == 1.0 and np.sum(w) == 1.0

    def test_unknown_numeric_indicator_value(self):
        enc = Encoder("x", "indicator", grid=np.array([1.0, 2.0]), vmin=1.0, vmax=2.0)
        with pytest.raises(UnknownLevelError):
            encode(enc, 1.5)


@st.composite
def knots_and_value(draw):
    k = draw(st.integers(min_value=2, max_value=12))
    raw = draw(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=k,
            max_size=k,
            unique=True,
        )
    )
    knots = np.sort(np.asarray(raw, dtype=np.float64))
    if np.min(np.diff(knots)) < 1e-9:
        knots = np.arange(k, dtype=np.float64)
    value = draw(st.floats(min_value=-200, max_value=200, allow_nan=False))
    return knots, value


class TestProperties:
    @given(knots_and_value())
    @settings(max_examples=200, deadline=None)
    def test_linear_weights_sum_to_one(self, case):
        knots, value = case
        w = encode(linear_encoder(knots), value)
        assert abs(w.sum() - 1.0) <= 1e-15
        assert np.all(w >= 0.0) and np.all(w <= 1.0)
        assert np.count_nonzero(w) <= 2

    @given(knots_and_value(), st.floats(min_value=1e-9, max_value=0.1))
    @settings(max_examples=200, deadline=None)
    def test_linear_lipschitz_in_l1(self, case, h):
        knots, value = case
        enc = linear_encoder(knots)
        l1 = np.abs(encode(enc, value) - encode(enc, value + h)).sum()
        min_gap = float(np.min(np.diff(knots)))
        assert l1 <= 2.0 * h / min_gap + 1e-12

    @given(knots_and_value())
    @settings(max_examples=100, deadline=None)
    def test_step_one_hot(self, case):
        knots, value = case
        enc = Encoder("x", "step", grid=knots, vmin=knots[0] - 1, vmax=knots[-1] + 1)
        w = encode(enc, value)
        assert np.count_nonzero(w) == 1 and w.sum() == 1.0

    def test_indicator_exact_sum(self):
        enc = Encoder("c", "indicator", levels=("a", "b", "c"))
        for lv in enc.levels:
            assert encode(enc, lv).sum() == 1.0


class TestEncodeColumn:
    def test_matches_scalar_encode(self, rng):
        col = numeric_column("u", rng.random(200))
        enc = build_encoder(col, k_max=7)
        i0, w0, i1, w1 = encode_column(enc, col)
        for idx in rng.integers(0, 200, size=20):
            dense = encode(enc, col.values[idx])
            sparse = np.zeros(enc.k)
            sparse[i0[idx]] += w0[idx]
            sparse[i1[idx]] += w1[idx]
            assert np.array_equal(dense, sparse)

    def test_categorical_level_remap(self):
        enc = Encoder("c", "indicator", levels=("a", "b", "c"))
        other = categorical_column("c", ["c", "a", "c"])  # different level table
        i0, w0, i1, w1 = encode_column(enc, other)
        assert list(i0) == [2, 0, 2]
        assert np.all(w0 == 1.0) and np.all(w1 == 0.0)

    def test_non_finite_rejected(self):
        enc = linear_encoder([0.0, 1.0])
        with pytest.raises(DataError, match="non-finite"):
            encode_column(enc, np.array([0.5, np.inf]))


class TestSerialization:
    def test_round_trip_numeric(self, rng):
        enc = build_encoder(numeric_column("u", rng.random(100)), k_max=9)
        back = encoder_from_dict(encoder_to_dict(enc))
        assert back.kind == enc.kind and back.k == enc.k
        assert np.array_equal(back.grid, enc.grid)
        assert back.vmin == enc.vmin and back.vmax == enc.vmax

    def test_round_trip_categorical(self):
        enc = Encoder("c", "indicator", levels=("x", "y"))
        back = encoder_from_dict(encoder_to_dict(enc))
        assert back.levels == enc.levels and back.k == 2
