# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernels.  Same contracts as ``_kernels_py``."""
import numpy as np

from libc.math cimport sqrt, pow, INFINITY


def min_ratio_pairs(const double[:, ::1] X, const double[:, ::1] Y,
                    Py_ssize_t start=0, Py_ssize_t stop=-1, double tol=1e-12):
    """min over i<j, i in [start, stop), of |Y_i - Y_j| / |X_i - X_j|."""
    cdef Py_ssize_t n = X.shape[0], dx = X.shape[1], dy = Y.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double best = INFINITY, a, b, t, ratio, tol2 = tol * tol
    if stop < 0 or stop > n:
        stop = n
    with nogil:
        for i in range(start, stop):
            for j in range(i + 1, n):
                a = 0.0
                for k in range(dx):
                    t = X[i, k] - X[j, k]
                    a += t * t
                if a < tol2:
                    continue
                b = 0.0
                for k in range(dy):
                    t = Y[i, k] - Y[j, k]
                    b += t * t
                # compare squared ratios; sqrt only for the winner
                if b < best * a:
                    best = b / a
    return sqrt(best) if best != INFINITY else INFINITY


def min_ratio_cross(const double[:, ::1] X1, const double[:, ::1] Y1,
                    const double[:, ::1] X2, const double[:, ::1] Y2,
                    Py_ssize_t start=0, Py_ssize_t stop=-1, double tol=1e-12):
    """min over i in [start, stop), all j, of |Y1_i - Y2_j| / |X1_i - X2_j|."""
    cdef Py_ssize_t n1 = X1.shape[0], n2 = X2.shape[0]
    cdef Py_ssize_t dx = X1.shape[1], dy = Y1.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double best = INFINITY, a, b, t, tol2 = tol * tol
    if stop < 0 or stop > n1:
        stop = n1
    with nogil:
        for i in range(start, stop):
            for j in range(n2):
                a = 0.0
                for k in range(dx):
                    t = X1[i, k] - X2[j, k]
                    a += t * t
                if a < tol2:
                    continue
                b = 0.0
                for k in range(dy):
                    t = Y1[i, k] - Y2[j, k]
                    b += t * t
                if b < best * a:
                    best = b / a
    return sqrt(best) if best != INFINITY else INFINITY


def pair_energy(const double[:, ::1] Y, const double[:, ::1] Z, double alpha,
                bint grad=True, double tol=1e-14):
    """Energy sum_{i != j} |Y_i - Y_j|^-alpha + sum_{i, j} |Y_i - Z_j|^-alpha.

    Returns (energy, dE/dY, dE/dZ); energy is inf (gradients None) when two
    points are closer than ``tol``.
    """
    cdef Py_ssize_t n = Y.shape[0], m = Z.shape[0], d = Y.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double e = 0.0, s, t, p, c, tol2 = tol * tol, h = -0.5 * alpha
    cdef bint hit = False
    gY_arr = np.zeros((n, d))
    gZ_arr = np.zeros((m, d))
    cdef double[:, ::1] gY = gY_arr
    cdef double[:, ::1] gZ = gZ_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                s = 0.0
                for k in range(d):
                    t = Y[i, k] - Y[j, k]
                    s += t * t
                if s < tol2:
                    hit = True
                    break
                p = pow(s, h)
                e += 2.0 * p
                if grad:
                    c = -2.0 * alpha * p / s
                    for k in range(d):
                        t = c * (Y[i, k] - Y[j, k])
                        gY[i, k] += t
                        gY[j, k] -= t
            if hit:
                break
            for j in range(m):
                s = 0.0
                for k in range(d):
                    t = Y[i, k] - Z[j, k]
                    s += t * t
                if s < tol2:
                    hit = True
                    break
                p = pow(s, h)
                e += p
                if grad:
                    c = -alpha * p / s
                    for k in range(d):
                        t = c * (Y[i, k] - Z[j, k])
                        gY[i, k] += t
                        gZ[j, k] -= t
            if hit:
                break
    if hit:
        return INFINITY, None, None
    if not grad:
        return e, None, None
    return e, gY_arr, gZ_arr
