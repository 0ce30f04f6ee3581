# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

Must stay operation-for-operation identical to fallback.py: same
elementary float ops per element, same order. Built with
-ffp-contract=off so a*b+c is never fused into an FMA.
"""

from libc.math cimport fabs, sqrt

import numpy as np


def saxpy(double[::1] acc, double[::1] part, double w):
    cdef Py_ssize_t i, n = acc.shape[0]
    with nogil:
        for i in range(n):
            acc[i] += w * part[i]


def mean_update(double[::1] mean, double[::1] x, double k):
    cdef Py_ssize_t i, n = mean.shape[0]
    with nogil:
        for i in range(n):
            mean[i] += (x[i] - mean[i]) / k


def affine(double[:, ::1] x, double[:, ::1] weight, double[::1] bias,
           double[:, ::1] out):
    cdef Py_ssize_t n = x.shape[0], nf = x.shape[1], nh = weight.shape[0]
    cdef Py_ssize_t i, f, h
    cdef double xi
    with nogil:
        for i in range(n):
            for h in range(nh):
                out[i, h] = bias[h]
        for f in range(nf):
            for i in range(n):
                xi = x[i, f]
                for h in range(nh):
                    out[i, h] += xi * weight[h, f]


def pair_symxent_sum(double[:, ::1] p, double[:, ::1] logq,
                     double[:, ::1] q, double[:, ::1] logp):
    cdef Py_ssize_t i, c, n = p.shape[0], nc = p.shape[1]
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            for c in range(nc):
                # group the two products before the running add so the
                # result is bitwise invariant under swapping the pairs
                acc += p[i, c] * logq[i, c] + q[i, c] * logp[i, c]
    return acc


def jacobi_eigh(b, int max_sweeps, double tol):
    a_arr = np.array(b, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n)
    if n == 1:
        return np.diagonal(a_arr).copy(), v_arr
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef double thresh = tol * tol
    cdef double off2, apq, theta, t, c, s, tp, tq
    cdef Py_ssize_t sweep, i, j, p, q
    cdef bint done = False
    with nogil:
        for sweep in range(max_sweeps):
            off2 = 0.0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    off2 += a[i, j] * a[i, j]
            off2 = 2.0 * off2
            if off2 < thresh:
                done = True
            if done:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if fabs(theta) > 1.0e150:
                        t = 1.0 / (2.0 * theta)
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        tp = a[i, p]
                        tq = a[i, q]
                        a[i, p] = c * tp - s * tq
                        a[i, q] = s * tp + c * tq
                    for i in range(n):
                        tp = a[p, i]
                        tq = a[q, i]
                        a[p, i] = c * tp - s * tq
                        a[q, i] = s * tp + c * tq
                    for i in range(n):
                        tp = v[i, p]
                        tq = v[i, q]
                        v[i, p] = c * tp - s * tq
                        v[i, q] = s * tp + c * tq
    return np.diagonal(a_arr).copy(), v_arr
