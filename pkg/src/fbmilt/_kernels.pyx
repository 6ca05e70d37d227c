# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot numerical kernels.

Same contract as _kernels_py; selected at import time by _backend.
"""

from libc.math cimport exp

import numpy as np


def gauss_weight_sum(double[:, ::1] x, double[:, ::1] y,
                     double[::1] wx, double[::1] wy, double eps):
    """sum_{i,j} wx_i wy_j exp(-|x_i - y_j|^2 / (2 eps))."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = y.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double inv = 0.5 / eps
    cdef double total = 0.0
    cdef double row, sq, diff
    for i in range(n):
        row = 0.0
        for j in range(m):
            sq = 0.0
            for k in range(d):
                diff = x[i, k] - y[j, k]
                sq += diff * diff
            row += wy[j] * exp(-sq * inv)
        total += wx[i] * row
    return total
