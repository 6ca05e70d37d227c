"""Exact samplers for d-dimensional fractional Brownian motion paths.

Two samplers of the same Gaussian law: a dense Cholesky factorization of
the covariance matrix (the correctness reference, any grid up to 4096
steps) and Davies-Harte circulant embedding of the fractional Gaussian
noise autocovariance (O(n log n), uniform grids).  Coordinates are
independent one-dimensional fBms; pairs use disjoint child streams of a
counter-based generator so replications are reproducible regardless of
how they are distributed over workers.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .covkernel import ModelConfig, cov_rh
from .errors import ParameterError

__all__ = [
    "TimeGrid",
    "FbmPath",
    "FbmPathPair",
    "sample_cholesky",
    "sample_circulant",
    "sample_pair",
    "path_to_csv",
]

_CHOLESKY_MAX_STEPS = 4096


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_n = horizon with n_steps intervals."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (self.horizon > 0.0):
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ParameterError(f"n_steps must be an integer >= 1, got {self.n_steps}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def step(self) -> float:
        return self.horizon / self.n_steps

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_steps + 1, self.step)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


@dataclass(frozen=True)
class FbmPath:
    grid: TimeGrid
    hurst: float
    values: np.ndarray  # (n_steps + 1, dim), values[0] == 0

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FbmPathPair:
    first: FbmPath
    second: FbmPath
    seed: int


def _as_generator(stream):
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(stream))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(stream)))


@lru_cache(maxsize=32)
def _cholesky_factor(hurst, n):
    """Lower factor of the fBm covariance on the unit grid {1/n, ..., 1}."""
    t = np.arange(1, n + 1) / n
    cov = cov_rh(t[:, None], t[None, :], hurst)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ParameterError(
            f"covariance factorization failed for hurst={hurst}, n={n}: {exc}"
        ) from exc


def sample_cholesky(grid: TimeGrid, cfg: ModelConfig, stream) -> FbmPath:
    """Exact fBm path by dense Cholesky factorization.

    The factor is computed on the unit grid and scaled by horizon^H
    (self-similarity), so it is cached across horizons.
    """
    if grid.n_steps > _CHOLESKY_MAX_STEPS:
        raise ParameterError(
            f"cholesky sampler limited to {_CHOLESKY_MAX_STEPS} steps, "
            f"got {grid.n_steps}"
        )
    rng = _as_generator(stream)
    n = grid.n_steps
    L = _cholesky_factor(cfg.hurst, n)
    z = rng.standard_normal((n, cfg.dim))
    values = np.zeros((n + 1, cfg.dim))
    values[1:] = grid.horizon**cfg.hurst * (L @ z)
    return FbmPath(grid=grid, hurst=cfg.hurst, values=values)


@lru_cache(maxsize=32)
def _circulant_eigenvalues(hurst, n):
    """Eigenvalues of the circulant embedding of the fGn autocovariance.

    Returns the eigenvalue array of length 2n, or None when the embedding
    has a meaningfully negative eigenvalue.
    """
    h2 = 2.0 * hurst
    k = np.arange(n + 1, dtype=float)
    c = 0.5 * (np.abs(k + 1.0) ** h2 + np.abs(k - 1.0) ** h2 - 2.0 * k**h2)
    row = np.concatenate([c, c[n - 1:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-8 * lam.max():
        return None
    lam.setflags(write=False)
    return np.maximum(lam, 0.0)


def sample_circulant(grid: TimeGrid, cfg: ModelConfig, stream) -> FbmPath:
    """Exact fBm path by circulant embedding of fractional Gaussian noise.

    Unit-spacing fGn is synthesized by FFT from the circulant eigenvalues
    and rescaled by step^H; the path is its cumulative sum.  Falls back to
    the Cholesky sampler with a warning if the embedding fails.
    """
    rng = _as_generator(stream)
    n = grid.n_steps
    lam = _circulant_eigenvalues(cfg.hurst, n)
    if lam is None:
        warnings.warn(
            "circulant embedding has a negative eigenvalue; "
            "falling back to the cholesky sampler",
            RuntimeWarning,
        )
        return sample_cholesky(grid, cfg, rng)
    m = 2 * n
    scale = grid.step**cfg.hurst
    values = np.zeros((n + 1, cfg.dim))
    for j in range(cfg.dim):
        a = np.zeros(m, dtype=complex)
        a[0] = np.sqrt(lam[0] / m) * rng.standard_normal()
        a[n] = np.sqrt(lam[n] / m) * rng.standard_normal()
        zr = rng.standard_normal(n - 1)
        zi = rng.standard_normal(n - 1)
        coef = np.sqrt(lam[1:n] / (2.0 * m))
        a[1:n] = coef * (zr + 1j * zi)
        a[n + 1:] = np.conj(a[1:n][::-1])
        fgn = np.fft.fft(a)[:n].real
        values[1:, j] = np.cumsum(scale * fgn)
    return FbmPath(grid=grid, hurst=cfg.hurst, values=values)


_SAMPLERS = {"cholesky": sample_cholesky, "circulant": sample_circulant}


def sample_pair(grid: TimeGrid, cfg: ModelConfig, seed, method="circulant") -> FbmPathPair:
    """Two independent paths from disjoint child streams of one seed.

    ``seed`` may be an integer or a numpy SeedSequence (the latter is how
    Monte Carlo replications address per-replication streams).
    """
    if method not in _SAMPLERS:
        raise ParameterError(f"method must be one of {sorted(_SAMPLERS)}, got {method!r}")
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
        seed_field = int(ss.entropy if np.isscalar(ss.entropy) else ss.entropy[0])
    else:
        ss = np.random.SeedSequence(int(seed))
        seed_field = int(seed)
    child_first, child_second = ss.spawn(2)
    sampler = _SAMPLERS[method]
    first = sampler(grid, cfg, child_first)
    second = sampler(grid, cfg, child_second)
    return FbmPathPair(first=first, second=second, seed=seed_field)


def path_to_csv(path: FbmPath, fileobj) -> None:
    """Debug dump: one row per time, columns time, x1..xd."""
    writer = csv.writer(fileobj)
    writer.writerow(["time"] + [f"x{j + 1}" for j in range(path.dim)])
    for t, row in zip(path.grid.times, path.values):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
