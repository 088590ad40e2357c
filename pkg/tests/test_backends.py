"""The compiled extension and the numpy fallback must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

import midkit._kernels_py as py_impl
from midkit import kernels

native_impl = pytest.importorskip("midkit._native", reason="compiled extension not built")


@pytest.fixture
def encoded_pair(rng):
    n = 5000
    knots_p = np.sort(rng.random(25))
    knots_p[0], knots_p[-1] = 0.0, 1.0
    knots_q = np.linspace(0, 1, 5)
    values_p = rng.uniform(-0.2, 1.2, n)  # includes out-of-range extrapolation
    values_q = rng.random(n)
    return values_p, knots_p, values_q, knots_q


def test_encode_linear_bit_identical(encoded_pair):
    values_p, knots_p, _, _ = encoded_pair
    for a, b in zip(py_impl.encode_linear(values_p, knots_p), native_impl.encode_linear(values_p, knots_p)):
        assert np.array_equal(a, b)


def test_encode_step_bit_identical(rng):
    values = rng.uniform(-1, 2, 3000)
    breaks = np.sort(rng.random(9))
    assert np.array_equal(py_impl.encode_step(values, breaks), native_impl.encode_step(values, breaks))


def test_eval_main_bit_identical(encoded_pair, rng):
    values_p, knots_p, _, _ = encoded_pair
    enc = py_impl.encode_linear(values_p, knots_p)
    coef = rng.standard_normal(len(knots_p))
    assert np.array_equal(py_impl.eval_main(coef, *enc), native_impl.eval_main(coef, *enc))


def test_eval_pair_bit_identical(encoded_pair, rng):
    values_p, knots_p, values_q, knots_q = encoded_pair
    ep = py_impl.encode_linear(values_p, knots_p)
    eq = py_impl.encode_linear(values_q, knots_q)
    coef = rng.standard_normal((len(knots_p), len(knots_q)))
    a = py_impl.eval_pair(coef, *ep, *eq)
    b = native_impl.eval_pair(coef, *ep, *eq)
    assert np.array_equal(a, b)


def test_pair_design_bit_identical(encoded_pair):
    values_p, knots_p, values_q, knots_q = encoded_pair
    ep = py_impl.encode_linear(values_p, knots_p)
    eq = py_impl.encode_linear(values_q, knots_q)
    cols_a, data_a = py_impl.pair_design(*ep, *eq, len(knots_q))
    cols_b, data_b = native_impl.pair_design(*ep, *eq, len(knots_q))
    assert np.array_equal(cols_a, cols_b)
    assert np.array_equal(data_a, data_b)


def test_default_backend_is_native():
    if os.environ.get("MIDKIT_BACKEND"):
        pytest.skip("backend forced by environment")
    assert kernels.BACKEND == "native"


def test_env_var_forces_python_backend():
    code = "from midkit import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, MIDKIT_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


def test_fit_identical_across_backends(tmp_path):
    code = (
        "import numpy as np\n"
        "from midkit import fit, gen_friedman1, predict\n"
        "ds, y = gen_friedman1(300, seed=5)\n"
        "m = fit(ds, y, order=2, k=(8, 3))\n"
        "np.save(r'{out}', predict(m, ds))\n"
    )
    outputs = {}
    for backend in ("python", "native"):
        out = tmp_path / f"{backend}.npy"
        env = dict(os.environ, MIDKIT_BACKEND=backend)
        subprocess.run(
            [sys.executable, "-c", code.format(out=out)], env=env, check=True, capture_output=True
        )
        outputs[backend] = np.load(out)
    assert np.array_equal(outputs["python"], outputs["native"])
