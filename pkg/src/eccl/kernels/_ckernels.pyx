# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for candidate scoring and the batched policy gradient."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()


def logits(theta, row_ptr, feat_idx):
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const long long[::1] rp = np.ascontiguousarray(row_ptr, dtype=np.int64)
    cdef const long long[::1] fi = np.ascontiguousarray(feat_idx, dtype=np.int64)
    cdef Py_ssize_t n = rp.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t a, j
    cdef double acc
    for a in range(n):
        acc = 0.0
        for j in range(rp[a], rp[a + 1]):
            acc += th[fi[j]]
        o[a] = acc
    return out


def log_softmax(z):
    cdef const double[::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zz.shape[0], a
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double m = zz[0], acc = 0.0
    for a in range(1, n):
        if zz[a] > m:
            m = zz[a]
    for a in range(n):
        acc += exp(zz[a] - m)
    acc = log(acc)
    for a in range(n):
        o[a] = zz[a] - m - acc
    return out


cdef void _seg_log_softmax(const double[::1] z, double[::1] out, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t a
    cdef double m = z[lo], acc = 0.0
    for a in range(lo + 1, hi):
        if z[a] > m:
            m = z[a]
    for a in range(lo, hi):
        acc += exp(z[a] - m)
    acc = log(acc)
    for a in range(lo, hi):
        out[a] = z[a] - m - acc


def policy_grad(theta, ref_theta, row_ptr, feat_idx, point_ptr, chosen, coef, double kl_weight):
    cdef const long long[::1] rp = np.ascontiguousarray(row_ptr, dtype=np.int64)
    cdef const long long[::1] fi = np.ascontiguousarray(feat_idx, dtype=np.int64)
    cdef const long long[::1] pp = np.ascontiguousarray(point_ptr, dtype=np.int64)
    cdef const long long[::1] ch = np.ascontiguousarray(chosen, dtype=np.int64)
    cdef const double[::1] cf = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t D = len(theta)
    cdef Py_ssize_t n_points = pp.shape[0] - 1
    cdef Py_ssize_t n_rows = rp.shape[0] - 1
    z_np = logits(theta, row_ptr, feat_idx)
    r_np = logits(ref_theta, row_ptr, feat_idx)
    cdef const double[::1] z = z_np
    cdef const double[::1] zr = r_np
    s_np = np.empty(n_rows, dtype=np.float64)
    q_np = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] s = s_np
    cdef double[::1] q = q_np
    grad_np = np.zeros(D, dtype=np.float64)
    logp_np = np.zeros(n_points, dtype=np.float64)
    kl_np = np.zeros(n_points, dtype=np.float64)
    cdef double[::1] g = grad_np
    cdef double[::1] lp = logp_np
    cdef double[::1] kl = kl_np
    cdef Py_ssize_t pt, a, j, lo, hi
    cdef double p, klp, w, c
    with nogil:
        for pt in range(n_points):
            lo = pp[pt]
            hi = pp[pt + 1]
            _seg_log_softmax(z, s, lo, hi)
            _seg_log_softmax(zr, q, lo, hi)
            klp = 0.0
            for a in range(lo, hi):
                klp += exp(s[a]) * (s[a] - q[a])
            kl[pt] = klp
            lp[pt] = s[lo + ch[pt]]
            c = cf[pt]
            for a in range(lo, hi):
                p = exp(s[a])
                w = -c * p - kl_weight * (p * (s[a] - q[a]) - klp * p)
                if a == lo + ch[pt]:
                    w += c
                for j in range(rp[a], rp[a + 1]):
                    g[fi[j]] += w
    return grad_np, logp_np, kl_np
