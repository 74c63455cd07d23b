# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot manifold kernels in ``_kernels_py``.

Same contracts, fused loops instead of numpy temporaries. Parity with the
pure-Python backend is enforced by tests/test_kernels.py; the speed gap is
measured by benchmarks/bench_kernels.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acosh, cosh, exp, sinh, sqrt

cnp.import_array()

DEF ZERO_TANGENT_TOL = 1e-12


def lift_fwd(v, double k):
    cdef double[:, ::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t t = vv.shape[0], n = vv.shape[1]
    out_arr = np.empty((t, n + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double c = sqrt(-k)
    cdef double r, rc, factor
    cdef Py_ssize_t i, j
    for i in range(t):
        r = 0.0
        for j in range(n):
            r += vv[i, j] * vv[i, j]
        r = sqrt(r)
        rc = c * r
        factor = 1.0 if r < ZERO_TANGENT_TOL else sinh(rc) / rc
        out[i, 0] = cosh(rc) / c
        for j in range(n):
            out[i, j + 1] = factor * vv[i, j]
    return out_arr


def lift_bwd(v, double k, grad_out):
    cdef double[:, ::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[:, ::1] go = np.ascontiguousarray(grad_out, dtype=np.float64)
    cdef Py_ssize_t t = vv.shape[0], n = vv.shape[1]
    grad_arr = np.empty((t, n), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef double c = sqrt(-k)
    cdef double r, rc, factor, dot, coef
    cdef Py_ssize_t i, j
    for i in range(t):
        r = 0.0
        for j in range(n):
            r += vv[i, j] * vv[i, j]
        r = sqrt(r)
        if r < ZERO_TANGENT_TOL:
            for j in range(n):
                grad[i, j] = go[i, j + 1] + c * go[i, 0] * vv[i, j]
            continue
        rc = c * r
        factor = sinh(rc) / rc
        dot = 0.0
        for j in range(n):
            dot += go[i, j + 1] * vv[i, j]
        coef = go[i, 0] * sinh(rc) / r + dot * (cosh(rc) - factor) / (r * r)
        for j in range(n):
            grad[i, j] = factor * go[i, j + 1] + coef * vv[i, j]
    return grad_arr


def _mirrored_gram(p):
    """p @ M p^T via BLAS, where M negates the time column."""
    pm = np.ascontiguousarray(p, dtype=np.float64).copy()
    pm[:, 0] = -pm[:, 0]
    return np.ascontiguousarray(p, dtype=np.float64) @ pm.T, pm


def pairwise_geodesic_fwd(p, double k):
    # BLAS handles the Gram product; the fused tail does clamp + acosh + diag
    gram, _ = _mirrored_gram(p)
    cdef double[:, ::1] g = gram
    cdef Py_ssize_t t = g.shape[0]
    d_arr = np.empty((t, t), dtype=np.float64)
    cdef double[:, ::1] d = d_arr
    cdef double u, dist
    cdef Py_ssize_t i, j
    for i in range(t):
        d[i, i] = 0.0
        for j in range(i + 1, t):
            u = k * g[i, j]
            dist = acosh(u) if u > 1.0 else 0.0
            d[i, j] = dist
            d[j, i] = dist
    return d_arr


def pairwise_geodesic_bwd(p, double k, grad_out):
    gram, pm = _mirrored_gram(p)
    cdef double[:, ::1] g = gram
    cdef double[:, ::1] go = np.ascontiguousarray(grad_out, dtype=np.float64)
    cdef Py_ssize_t t = g.shape[0]
    w_arr = np.zeros((t, t), dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef double u
    cdef Py_ssize_t i, j
    for i in range(t):
        for j in range(t):
            if j == i:
                continue
            u = k * g[i, j]
            if u > 1.0:
                w[i, j] = (go[i, j] + go[j, i]) * k / sqrt(u * u - 1.0)
    return w_arr @ pm


def timelike_normalize_fwd(s, double k):
    cdef double[:, ::1] ss = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t t = ss.shape[0], m = ss.shape[1]
    out_arr = np.empty((t, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double c = sqrt(-k)
    cdef double q, scale
    cdef Py_ssize_t i, j
    for i in range(t):
        q = -ss[i, 0] * ss[i, 0]
        for j in range(1, m):
            q += ss[i, j] * ss[i, j]
        if q >= 0.0:
            raise ValueError("aggregate is not time-like")
        if ss[i, 0] <= 0.0:
            raise ValueError("aggregate has non-positive time coordinate")
        scale = 1.0 / (c * sqrt(-q))
        for j in range(m):
            out[i, j] = ss[i, j] * scale
    return out_arr


def timelike_normalize_bwd(s, double k, grad_out):
    cdef double[:, ::1] ss = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[:, ::1] go = np.ascontiguousarray(grad_out, dtype=np.float64)
    cdef Py_ssize_t t = ss.shape[0], m = ss.shape[1]
    grad_arr = np.empty((t, m), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef double c = sqrt(-k)
    cdef double q, n, dot, inv, coef
    cdef Py_ssize_t i, j
    for i in range(t):
        q = -ss[i, 0] * ss[i, 0]
        for j in range(1, m):
            q += ss[i, j] * ss[i, j]
        n = sqrt(-q)
        dot = 0.0
        for j in range(m):
            dot += go[i, j] * ss[i, j]
        inv = 1.0 / (c * n)
        coef = dot / (c * n * n * n)
        grad[i, 0] = go[i, 0] * inv - coef * ss[i, 0]
        for j in range(1, m):
            grad[i, j] = go[i, j] * inv + coef * ss[i, j]
    return grad_arr


def masked_row_softmax_fwd(logits, mask):
    cdef double[:, ::1] lg = np.ascontiguousarray(logits, dtype=np.float64)
    cdef double[:, ::1] mk = np.ascontiguousarray(mask, dtype=np.float64)
    cdef Py_ssize_t t = lg.shape[0], m = lg.shape[1]
    out_arr = np.zeros((t, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double rowmax, total
    cdef bint any_live
    cdef Py_ssize_t i, j
    for i in range(t):
        any_live = False
        rowmax = 0.0
        for j in range(m):
            if mk[i, j] > 0.0 and (not any_live or lg[i, j] > rowmax):
                rowmax = lg[i, j]
                any_live = True
        if not any_live:
            raise ValueError("softmax row with no surviving entries")
        total = 0.0
        for j in range(m):
            if mk[i, j] > 0.0:
                out[i, j] = exp(lg[i, j] - rowmax) * mk[i, j]
                total += out[i, j]
        for j in range(m):
            if mk[i, j] > 0.0:
                out[i, j] /= total
    return out_arr


def masked_row_softmax_bwd(probs, mask, grad_out):
    cdef double[:, ::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef double[:, ::1] go = np.ascontiguousarray(grad_out, dtype=np.float64)
    cdef Py_ssize_t t = pr.shape[0], m = pr.shape[1]
    grad_arr = np.empty((t, m), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef double dot
    cdef Py_ssize_t i, j
    for i in range(t):
        dot = 0.0
        for j in range(m):
            dot += go[i, j] * pr[i, j]
        for j in range(m):
            grad[i, j] = pr[i, j] * (go[i, j] - dot)
    return grad_arr
