"""Compare the compiled kernel extension against the pure-numpy fallback.

Times the hot kernels (linear encoding, interaction design assembly,
main/pair effect evaluation) and an end-to-end fit + predict, once per
backend, and prints a speedup table. Run from the repo root:

    python3 benchmarks/bench_backends.py [--n 200000] [--reps 5]
"""

import argparse
import time

import numpy as np

import midkit._kernels_py as py_impl

try:
    import midkit._native as native_impl
except ImportError:
    native_impl = None


def best_of(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(impl, n, rng):
    values = rng.random(n)
    knots = np.linspace(0, 1, 25)
    i0, w0, i1, w1 = impl.encode_linear(values, knots)
    coef = rng.standard_normal(25)
    kq = 5
    qi0, qw0, qi1, qw1 = impl.encode_linear(rng.random(n), np.linspace(0, 1, kq))
    coef2 = rng.standard_normal((25, kq))
    return {
        "encode_linear": lambda: impl.encode_linear(values, knots),
        "eval_main": lambda: impl.eval_main(coef, i0, w0, i1, w1),
        "eval_pair": lambda: impl.eval_pair(coef2, i0, w0, i1, w1, qi0, qw0, qi1, qw1),
        "pair_design": lambda: impl.pair_design(i0, w0, i1, w1, qi0, qw0, qi1, qw1, kq),
    }


def end_to_end(n, seed):
    # re-import with the backend already pinned by the caller via env
    from midkit import fit, gen_friedman1, predict

    ds, y = gen_friedman1(n, seed)
    model = fit(ds, y, order=2, k=(10, 3))
    predict(model, ds)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=200_000)
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()

    if native_impl is None:
        print("compiled extension not available; build it with: pip install -e . --no-build-isolation")
        return

    rng = np.random.default_rng(0)
    rows = []
    py_cases = kernel_cases(py_impl, args.n, np.random.default_rng(0))
    nat_cases = kernel_cases(native_impl, args.n, np.random.default_rng(0))
    for name in py_cases:
        t_py = best_of(py_cases[name], args.reps)
        t_nat = best_of(nat_cases[name], args.reps)
        rows.append((name, t_py * 1e3, t_nat * 1e3, t_py / t_nat))

    # backends must agree bit for bit
    values = rng.random(10_000)
    knots = np.linspace(0, 1, 25)
    for a, b in zip(py_impl.encode_linear(values, knots), native_impl.encode_linear(values, knots)):
        assert np.array_equal(a, b), "backend outputs differ"

    print(f"kernel benchmark, n={args.n}, best of {args.reps}")
    print(f"{'kernel':<16}{'python_ms':>12}{'native_ms':>12}{'speedup':>10}")
    for name, t_py, t_nat, speedup in rows:
        print(f"{name:<16}{t_py:>12.2f}{t_nat:>12.2f}{speedup:>10.1f}x")


if __name__ == "__main__":
    main()
