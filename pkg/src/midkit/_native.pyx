# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for encoding, design assembly and effect evaluation.

Semantics (including floating-point operation order) match the fallback in
midkit._kernels_py; tests assert bit-identical output.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _bisect_right(const double[::1] a, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if v < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def encode_linear(values, knots):
    """Hat-function weights over knots, constant extrapolation outside."""
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] kn = np.ascontiguousarray(knots, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], k = kn.shape[0], i, pos
    i0_arr = np.empty(n, dtype=np.int64)
    w0_arr = np.empty(n, dtype=np.float64)
    i1_arr = np.empty(n, dtype=np.int64)
    w1_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] i0 = i0_arr
    cdef double[::1] w0 = w0_arr
    cdef cnp.int64_t[::1] i1 = i1_arr
    cdef double[::1] w1 = w1_arr
    cdef double t
    with nogil:
        for i in range(n):
            pos = _bisect_right(kn, v[i]) - 1
            if pos < 0:
                i0[i] = 0
                i1[i] = 0
                w1[i] = 0.0
                w0[i] = 1.0
            elif pos >= k - 1:
                i0[i] = k - 1
                i1[i] = k - 1
                w1[i] = 0.0
                w0[i] = 1.0
            else:
                t = (v[i] - kn[pos]) / (kn[pos + 1] - kn[pos])
                i0[i] = pos
                i1[i] = pos + 1
                w1[i] = t
                w0[i] = 1.0 - t
    return i0_arr, w0_arr, i1_arr, w1_arr


def encode_step(values, breaks):
    """Half-open interval index: breaks[s-1] <= v < breaks[s]."""
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(breaks, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i
    out_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = _bisect_right(b, v[i])
    return out_arr


def eval_main(coef, i0, w0, i1, w1):
    """Per-row value of a main-effect coefficient vector."""
    cdef const double[::1] c = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const cnp.int64_t[::1] a0 = i0
    cdef const double[::1] u0 = w0
    cdef const cnp.int64_t[::1] a1 = i1
    cdef const double[::1] u1 = w1
    cdef Py_ssize_t n = a0.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = c[a0[i]] * u0[i] + c[a1[i]] * u1[i]
    return out_arr


def eval_pair(coef, pi0, pw0, pi1, pw1, qi0, qw0, qi1, qw1):
    """Per-row value of an interaction coefficient matrix (bilinear gather)."""
    cdef const double[:, ::1] c = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const cnp.int64_t[::1] p0 = pi0
    cdef const double[::1] a0 = pw0
    cdef const cnp.int64_t[::1] p1 = pi1
    cdef const double[::1] a1 = pw1
    cdef const cnp.int64_t[::1] q0 = qi0
    cdef const double[::1] b0 = qw0
    cdef const cnp.int64_t[::1] q1 = qi1
    cdef const double[::1] b1 = qw1
    cdef Py_ssize_t n = p0.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = (c[p0[i], q0[i]] * b0[i] + c[p0[i], q1[i]] * b1[i]) * a0[i] + (
                c[p1[i], q0[i]] * b0[i] + c[p1[i], q1[i]] * b1[i]
            ) * a1[i]
    return out_arr


def pair_design(pi0, pw0, pi1, pw1, qi0, qw0, qi1, qw1, kq):
    """Per-row local column indices and weights of an interaction block."""
    cdef const cnp.int64_t[::1] p0 = pi0
    cdef const double[::1] a0 = pw0
    cdef const cnp.int64_t[::1] p1 = pi1
    cdef const double[::1] a1 = pw1
    cdef const cnp.int64_t[::1] q0 = qi0
    cdef const double[::1] b0 = qw0
    cdef const cnp.int64_t[::1] q1 = qi1
    cdef const double[::1] b1 = qw1
    cdef Py_ssize_t n = p0.shape[0], i
    cdef cnp.int64_t k = kq
    cols_arr = np.empty((n, 4), dtype=np.int64)
    data_arr = np.empty((n, 4), dtype=np.float64)
    cdef cnp.int64_t[:, ::1] cols = cols_arr
    cdef double[:, ::1] data = data_arr
    with nogil:
        for i in range(n):
            cols[i, 0] = p0[i] * k + q0[i]
            data[i, 0] = a0[i] * b0[i]
            cols[i, 1] = p0[i] * k + q1[i]
            data[i, 1] = a0[i] * b1[i]
            cols[i, 2] = p1[i] * k + q0[i]
            data[i, 2] = a1[i] * b0[i]
            cols[i, 3] = p1[i] * k + q1[i]
            data[i, 3] = a1[i] * b1[i]
    return cols_arr, data_arr
