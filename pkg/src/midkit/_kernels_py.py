"""Pure-numpy kernels: fallback used when the compiled extension is absent.

Every function here mirrors midkit._native exactly, including the order of
floating-point operations, so both backends produce bit-identical output.

Encoded columns are quadruples (i0, w0, i1, w1): weight w0 on slot i0 and
w1 on slot i1. One-hot encoders set i1 == i0 and w1 == 0 so downstream
gather arithmetic never needs a branch.
"""

import numpy as np


def encode_linear(values, knots):
    """Hat-function weights over knots, constant extrapolation outside."""
    values = np.asarray(values, dtype=np.float64)
    knots = np.asarray(knots, dtype=np.float64)
    k = knots.shape[0]
    n = values.shape[0]
    i0 = np.searchsorted(knots, values, side="right") - 1
    below = i0 < 0
    above = i0 >= k - 1
    inner = ~(below | above)
    np.clip(i0, 0, k - 2, out=i0)
    w1 = np.zeros(n)
    iv = i0[inner]
    w1[inner] = (values[inner] - knots[iv]) / (knots[iv + 1] - knots[iv])
    i1 = np.where(inner, i0 + 1, i0)
    # above the range: full weight on the last knot via the w1 slot
    i1[above] = k - 1
    i0[above] = k - 1
    w1[above] = 0.0
    w0 = 1.0 - w1
    return i0.astype(np.int64), w0, i1.astype(np.int64), w1


def encode_step(values, breaks):
    """Half-open interval index: breaks[s-1] <= v < breaks[s]."""
    values = np.asarray(values, dtype=np.float64)
    breaks = np.asarray(breaks, dtype=np.float64)
    return np.searchsorted(breaks, values, side="right").astype(np.int64)


def eval_main(coef, i0, w0, i1, w1):
    """Per-row value of a main-effect coefficient vector."""
    coef = np.asarray(coef, dtype=np.float64)
    return coef[i0] * w0 + coef[i1] * w1


def eval_pair(coef, pi0, pw0, pi1, pw1, qi0, qw0, qi1, qw1):
    """Per-row value of an interaction coefficient matrix (bilinear gather)."""
    coef = np.asarray(coef, dtype=np.float64)
    return (coef[pi0, qi0] * qw0 + coef[pi0, qi1] * qw1) * pw0 + (
        coef[pi1, qi0] * qw0 + coef[pi1, qi1] * qw1
    ) * pw1


def pair_design(pi0, pw0, pi1, pw1, qi0, qw0, qi1, qw1, kq):
    """Per-row local column indices and weights of an interaction block.

    Returns (cols, data), both shaped (n, 4); local column s*kq + t.
    Duplicate columns carry zero weight and may be summed away safely.
    """
    n = pi0.shape[0]
    cols = np.empty((n, 4), dtype=np.int64)
    data = np.empty((n, 4), dtype=np.float64)
    cols[:, 0] = pi0 * kq + qi0
    data[:, 0] = pw0 * qw0
    cols[:, 1] = pi0 * kq + qi1
    data[:, 1] = pw0 * qw1
    cols[:, 2] = pi1 * kq + qi0
    data[:, 2] = pw1 * qw0
    cols[:, 3] = pi1 * kq + qi1
    data[:, 3] = pw1 * qw1
    return cols, data
