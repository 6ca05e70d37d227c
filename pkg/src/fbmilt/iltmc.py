"""Monte Carlo side: the smoothed intersection local time over sampled
path pairs and moment estimation across replications.

I_eps of a path pair is the tensor-product trapezoid discretization of
the double time integral of the heat kernel of the path difference.  Its
kernel sum is the hot loop and is delegated to the selected backend.
Replications are addressed by per-replication child streams of one seed
and accumulated in fixed-size chunks merged in index order, so results
do not depend on the worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import gauss_weight_sum
from .covkernel import ModelConfig
from .errors import ParameterError
from .fbmgen import FbmPathPair, TimeGrid, sample_pair

__all__ = [
    "SmoothingEps",
    "MomentEstimate",
    "heat_kernel",
    "ilt_epsilon",
    "grid_for_eps",
    "mc_moments",
]

GRID_CAP = 4096
_CHUNK = 256


@dataclass(frozen=True)
class SmoothingEps:
    """Heat kernel bandwidth squared; strictly positive."""

    eps: float

    def __post_init__(self):
        if not (self.eps > 0.0):
            raise ParameterError(f"eps must be positive, got {self.eps}")


def _eps_value(eps) -> float:
    value = eps.eps if isinstance(eps, SmoothingEps) else float(eps)
    if not (value > 0.0):
        raise ParameterError(f"eps must be positive, got {value}")
    return value


def heat_kernel(x, eps, dim: int):
    """Gaussian density p_eps(x) = (2 pi eps)^(-d/2) exp(-|x|^2 / 2 eps).

    ``x`` is a vector of length ``dim`` or an array of them (last axis the
    coordinate axis).
    """
    e = _eps_value(eps)
    x = np.asarray(x, dtype=float)
    sq = x * x if x.ndim == 0 else np.sum(x * x, axis=-1)
    out = (2.0 * math.pi * e) ** (-0.5 * dim) * np.exp(-0.5 * sq / e)
    return out if np.ndim(out) else float(out)


def ilt_epsilon(pair: FbmPathPair, eps) -> float:
    """Trapezoid discretization of int int p_eps(B_t - B~_s) ds dt >= 0."""
    e = _eps_value(eps)
    first, second = pair.first, pair.second
    if first.grid != second.grid or first.dim != second.dim:
        raise ParameterError("the two paths must share grid and dimension")
    w = first.grid.trapezoid_weights()
    raw = gauss_weight_sum(first.values, second.values, w, w, e)
    return (2.0 * math.pi * e) ** (-0.5 * first.dim) * raw


def grid_for_eps(eps, cfg: ModelConfig, cap: int = GRID_CAP) -> int:
    """Steps needed so the path moves less than the kernel length scale
    per cell: step^H <= sqrt(eps)/4, i.e. n >= T (16/eps)^(1/2H).

    Capped at ``cap`` with a warning when the cap binds.
    """
    e = _eps_value(eps)
    n = math.ceil(cfg.horizon * (16.0 / e) ** (1.0 / (2.0 * cfg.hurst)))
    n = max(n, 16)
    if n > cap:
        warnings.warn(
            f"bias rule asks for {n} grid steps; capped at {cap} "
            f"(discretization bias may not be negligible)",
            RuntimeWarning,
        )
        n = cap
    return n


def _chunk_sums(cfg, e, grid, seed, method, rep_lo, rep_hi):
    s1 = s2 = s4 = 0.0
    for rep in range(rep_lo, rep_hi):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(rep,))
        pair = sample_pair(grid, cfg, ss, method=method)
        val = ilt_epsilon(pair, e)
        s1 += val
        s2 += val * val
        s4 += (val * val) * (val * val)
    return s1, s2, s4


def _chunk_sums_star(args):
    return _chunk_sums(*args)


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    second_moment: float
    variance: float
    se_mean: float
    se_second: float
    replications: int
    seed: int


def mc_moments(cfg: ModelConfig, eps, grid: TimeGrid, replications: int,
               seed: int, method: str = "circulant", workers: int = 1) -> MomentEstimate:
    """Estimate E[I_eps] and E[I_eps^2] over i.i.d. replications.

    Standard errors are sample standard deviations over replications
    divided by sqrt(replications); the one for the second moment comes
    from the fourth-moment accumulator.
    """
    if replications < 2:
        raise ParameterError(f"replications must be >= 2, got {replications}")
    e = _eps_value(eps)
    chunks = [
        (cfg, e, grid, seed, method, lo, min(lo + _CHUNK, replications))
        for lo in range(0, replications, _CHUNK)
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_sums_star, chunks))
    else:
        parts = [_chunk_sums_star(c) for c in chunks]
    s1 = s2 = s4 = 0.0
    for p1, p2, p4 in parts:
        s1 += p1
        s2 += p2
        s4 += p4
    r = replications
    mean = s1 / r
    second = s2 / r
    fourth = s4 / r
    variance = second - mean * mean
    se_mean = math.sqrt(max(variance, 0.0) / r)
    se_second = math.sqrt(max(fourth - second * second, 0.0) / r)
    return MomentEstimate(
        mean=mean, second_moment=second, variance=variance,
        se_mean=se_mean, se_second=se_second, replications=r, seed=seed,
    )
