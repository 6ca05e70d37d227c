"""Globally adaptive cubature with an embedded-rule error estimator.

Genz-Malik degree-7 rule with the embedded degree-5 estimate, over
axis-aligned cells of a hyper-rectangle.  Cells live in a priority queue
keyed by their error estimate; the worst batch is bisected along the
direction of largest fourth divided difference.  Integrands are called
vectorized on an (npoints, ndim) array.

The error estimate is conservative (a straight sum of per-cell embedded
differences), so `status == "budget"` does not necessarily mean the value
is bad -- callers that only need the value may accept budget results.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["CubatureResult", "integrate", "genz_malik_rule"]


@dataclass
class CubatureResult:
    value: float
    error: float
    nevals: int
    ncells: int
    status: str  # "converged" | "budget" | "exhausted"


@lru_cache(maxsize=8)
def genz_malik_rule(ndim):
    """Points and weights of the degree-7/5 Genz-Malik pair on [-1, 1]^ndim.

    Returns (points, w7, w5) with weights scaled to the 2^ndim cube volume.
    """
    n = ndim
    l2 = np.sqrt(9.0 / 70.0)
    l3 = np.sqrt(9.0 / 10.0)
    l5 = np.sqrt(9.0 / 19.0)
    pts = [np.zeros(n)]
    grp = [0]
    for i in range(n):
        for sign in (+1.0, -1.0):
            p = np.zeros(n)
            p[i] = sign * l2
            pts.append(p)
            grp.append(1)
    for i in range(n):
        for sign in (+1.0, -1.0):
            p = np.zeros(n)
            p[i] = sign * l3
            pts.append(p)
            grp.append(2)
    for i in range(n):
        for j in range(i + 1, n):
            for si in (+1.0, -1.0):
                for sj in (+1.0, -1.0):
                    p = np.zeros(n)
                    p[i] = si * l3
                    p[j] = sj * l3
                    pts.append(p)
                    grp.append(3)
    for mask in range(2**n):
        pts.append(np.array([l5 if (mask >> k) & 1 else -l5 for k in range(n)]))
        grp.append(4)
    pts = np.array(pts)
    grp = np.array(grp)
    twon = 2.0**n
    w7 = np.array(
        [
            twon * (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0,
            twon * 980.0 / 6561.0,
            twon * (1820.0 - 400.0 * n) / 19683.0,
            twon * 200.0 / 19683.0,
            6859.0 / 19683.0,
        ]
    )
    w5 = np.array(
        [
            twon * (729.0 - 950.0 * n + 50.0 * n * n) / 729.0,
            twon * 245.0 / 486.0,
            twon * (265.0 - 100.0 * n) / 1458.0,
            twon * 25.0 / 729.0,
            0.0,
        ]
    )
    return pts, w7[grp], w5[grp]


def _initial_cells(lo, hi, init_splits):
    ndim = len(lo)
    if init_splits is None:
        axes = [np.array([lo[i], hi[i]]) for i in range(ndim)]
    else:
        axes = [np.asarray(a, dtype=float) for a in init_splits]
    idx = np.meshgrid(*[np.arange(len(a) - 1) for a in axes], indexing="ij")
    clo = np.stack([axes[k][idx[k].ravel()] for k in range(ndim)], axis=1)
    chi = np.stack([axes[k][idx[k].ravel() + 1] for k in range(ndim)], axis=1)
    return clo, chi


def integrate(
    f,
    lo,
    hi,
    abs_tol=0.0,
    rel_tol=1e-6,
    max_evals=10_000_000,
    init_splits=None,
    min_width_frac=1e-10,
    batch=128,
):
    """Adaptively integrate ``f`` over the box [lo, hi].

    ``f`` maps an (m, ndim) array to an (m,) array and must return finite
    values on the open box (boundary points are never sampled).
    ``init_splits``, when given, is a per-axis list of breakpoints defining
    the starting mesh (used to pre-grade toward known singular faces).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    ndim = len(lo)
    pts, w7, w5 = genz_malik_rule(ndim)
    npts = len(pts)
    ratio = (9.0 / 10.0) / (9.0 / 70.0)  # lambda3^2 / lambda2^2
    g1 = [(1 + 2 * i, 2 + 2 * i) for i in range(ndim)]
    g2 = [(1 + 2 * ndim + 2 * i, 2 + 2 * ndim + 2 * i) for i in range(ndim)]
    min_width = min_width_frac * (hi - lo)

    def eval_cells(clo, chi):
        m = len(clo)
        cen = 0.5 * (clo + chi)
        hw = 0.5 * (chi - clo)
        x = cen[:, None, :] + hw[:, None, :] * pts[None, :, :]
        vals = np.asarray(f(x.reshape(-1, ndim)), dtype=float).reshape(m, npts)
        vol = np.prod(hw, axis=1)
        i7 = (vals * w7).sum(axis=1) * vol
        i5 = (vals * w5).sum(axis=1) * vol
        err = np.abs(i7 - i5)
        fc = vals[:, 0]
        diffs = np.empty((m, ndim))
        for i in range(ndim):
            p1, p2 = g1[i]
            p3, p4 = g2[i]
            diffs[:, i] = np.abs(
                vals[:, p3] + vals[:, p4] - 2 * fc - ratio * (vals[:, p1] + vals[:, p2] - 2 * fc)
            )
        width = chi - clo
        diffs = np.where(width > min_width[None, :], diffs, -1.0)
        split_dim = np.argmax(diffs, axis=1)
        splittable = diffs.max(axis=1) >= 0.0
        return i7, err, split_dim, splittable

    clo, chi = _initial_cells(lo, hi, init_splits)
    vals0, errs0, sd0, sp0 = eval_cells(clo, chi)
    nevals = len(clo) * npts
    cell_lo = list(clo)
    cell_hi = list(chi)
    vals = list(vals0)
    errs = list(errs0)
    sds = list(sd0)
    alive = list(sp0)
    heap = [(-errs0[i], i) for i in range(len(vals0)) if sp0[i]]
    heapq.heapify(heap)
    total = float(np.sum(vals0))
    toterr = float(np.sum(errs0))
    status = "converged"

    while True:
        if toterr <= max(abs_tol, rel_tol * abs(total)):
            break
        if nevals >= max_evals:
            status = "budget"
            break
        popped = []
        while heap and len(popped) < batch:
            _, i = heapq.heappop(heap)
            if alive[i]:
                popped.append(i)
        if not popped:
            status = "exhausted"
            break
        new_lo = []
        new_hi = []
        for i in popped:
            alive[i] = False
            total -= vals[i]
            toterr -= errs[i]
            d = sds[i]
            mid = 0.5 * (cell_lo[i][d] + cell_hi[i][d])
            a1, b1 = cell_lo[i].copy(), cell_hi[i].copy()
            a2, b2 = cell_lo[i].copy(), cell_hi[i].copy()
            b1[d] = mid
            a2[d] = mid
            new_lo += [a1, a2]
            new_hi += [b1, b2]
        new_lo = np.array(new_lo)
        new_hi = np.array(new_hi)
        v2, e2, sd2, sp2 = eval_cells(new_lo, new_hi)
        nevals += len(new_lo) * npts
        for j in range(len(new_lo)):
            idx = len(vals)
            cell_lo.append(new_lo[j])
            cell_hi.append(new_hi[j])
            vals.append(v2[j])
            errs.append(e2[j])
            sds.append(sd2[j])
            alive.append(bool(sp2[j]))
            total += v2[j]
            toterr += e2[j]
            if sp2[j]:
                heapq.heappush(heap, (-e2[j], idx))

    return CubatureResult(value=total, error=toterr, nevals=nevals, ncells=len(vals), status=status)
