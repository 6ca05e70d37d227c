"""Pure-numpy implementation of the hot numerical kernels.

Used when the compiled extension is unavailable (see _backend).  The
pairwise squared distances are computed blockwise through a matrix
product so the O(n*m*d) work runs inside BLAS.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 512


def gauss_weight_sum(x, y, wx, wy, eps):
    """sum_{i,j} wx_i wy_j exp(-|x_i - y_j|^2 / (2 eps)).

    x: (n, d), y: (m, d), wx: (n,), wy: (m,).  Returns a float; the
    caller applies the (2 pi eps)^(-d/2) normalization.
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    wx = np.asarray(wx, dtype=float)
    wy = np.asarray(wy, dtype=float)
    xx = np.einsum("ij,ij->i", x, x)
    yy = np.einsum("ij,ij->i", y, y)
    inv = 0.5 / eps
    total = 0.0
    for i0 in range(0, len(x), _BLOCK):
        i1 = min(i0 + _BLOCK, len(x))
        sq = xx[i0:i1, None] + yy[None, :] - 2.0 * (x[i0:i1] @ y.T)
        np.maximum(sq, 0.0, out=sq)
        np.exp(-inv * sq, out=sq)
        total += float(wx[i0:i1] @ sq @ wy)
    return total
