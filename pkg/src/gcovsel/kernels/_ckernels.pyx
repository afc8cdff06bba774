# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepwise-sweep kernels.

One fused pass per candidate column: the numpy backend does the same work
in three vectorized passes (dot, rank-1 update, norm update), this version
streams each column once.
"""

import numpy as np

cimport numpy as cnp


def sweep_project(double[:, ::1] Xw, double[::1] norms2, double[::1] u,
                  long long[::1] active):
    """Project the unit vector u out of every active candidate column."""
    cdef Py_ssize_t n = Xw.shape[1]
    cdef Py_ssize_t m = active.shape[0]
    cdef Py_ssize_t t, j, i
    cdef double d
    for t in range(m):
        i = active[t]
        d = 0.0
        for j in range(n):
            d += Xw[i, j] * u[j]
        for j in range(n):
            Xw[i, j] -= d * u[j]
        norms2[i] -= d * d


def best_gain(double[:, ::1] Xw, double[::1] r, double[::1] norms2,
              double[::1] min_norms2, long long[::1] active):
    """Index and rss gain of the best admissible candidate.

    Gain of column i is (x_i . r)^2 / ||x_i||^2 computed on the projected
    column; columns with squared norm below their admissibility floor are
    skipped.  Ties broken by lowest index (iteration order is increasing).
    Returns (-1, 0.0) when no candidate is admissible.
    """
    cdef Py_ssize_t n = Xw.shape[1]
    cdef Py_ssize_t m = active.shape[0]
    cdef Py_ssize_t t, j, i
    cdef Py_ssize_t best = -1
    cdef double best_g = -1.0
    cdef double d, g
    for t in range(m):
        i = active[t]
        if norms2[i] < min_norms2[i]:
            continue
        d = 0.0
        for j in range(n):
            d += Xw[i, j] * r[j]
        g = d * d / norms2[i]
        if g > best_g:
            best_g = g
            best = i
    if best < 0:
        return -1, 0.0
    return best, best_g
