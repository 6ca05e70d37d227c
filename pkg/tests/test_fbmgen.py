import io
import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from fbmilt.covkernel import ModelConfig, cov_rh
from fbmilt.errors import ParameterError
from fbmilt.fbmgen import (
    FbmPath,
    TimeGrid,
    path_to_csv,
    sample_cholesky,
    sample_circulant,
    sample_pair,
)


def _rng(*key):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


class TestTimeGrid:
    def test_times(self):
        g = TimeGrid(2.0, 4)
        np.testing.assert_allclose(g.times, [0, 0.5, 1.0, 1.5, 2.0])
        assert g.step == 0.5

    def test_trapezoid_weights(self):
        w = TimeGrid(1.0, 4).trapezoid_weights()
        np.testing.assert_allclose(w, [0.125, 0.25, 0.25, 0.25, 0.125])
        assert w.sum() == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ParameterError):
            TimeGrid(0.0, 4)
        with pytest.raises(ParameterError):
            TimeGrid(1.0, 0)


@pytest.mark.parametrize("sampler", [sample_cholesky, sample_circulant])
class TestSamplerBasics:
    def test_starts_at_zero(self, sampler):
        p = sampler(TimeGrid(1.0, 16), ModelConfig(0.7, 3), _rng(0))
        assert p.values.shape == (17, 3)
        np.testing.assert_array_equal(p.values[0], 0.0)

    def test_deterministic(self, sampler):
        g = TimeGrid(1.0, 32)
        cfg = ModelConfig(0.3, 2)
        a = sampler(g, cfg, _rng(1)).values
        b = sampler(g, cfg, _rng(1)).values
        np.testing.assert_array_equal(a, b)

    def test_seed_separation(self, sampler):
        g = TimeGrid(1.0, 32)
        cfg = ModelConfig(0.3, 2)
        a = sampler(g, cfg, _rng(1)).values
        b = sampler(g, cfg, _rng(2)).values
        assert not np.array_equal(a, b)

    def test_variance_at_horizon(self, sampler):
        cfg = ModelConfig(0.75, 2)
        g = TimeGrid(1.0, 16)
        R = 4000
        vals = np.array([sampler(g, cfg, _rng(3, r)).values[-1] for r in range(R)])
        var = vals.var(axis=0)
        se = var * math.sqrt(2.0 / R)  # sd of a variance estimate, Gaussian data
        want = g.horizon ** (2 * cfg.hurst)
        assert np.all(np.abs(var - want) <= 4 * se + 4 * want * math.sqrt(2.0 / R))


class TestCholesky:
    def test_step_limit(self):
        with pytest.raises(ParameterError):
            sample_cholesky(TimeGrid(1.0, 8192), ModelConfig(0.5, 2), _rng(0))

    def test_sample_covariance(self):
        # grid {0, 0.5, 1}: E[B_0.5 B_1] = R_H(0.5, 1)
        cfg = ModelConfig(0.75, 2)
        g = TimeGrid(1.0, 2)
        R = 20_000
        prods = np.empty(R)
        for r in range(R):
            v = sample_cholesky(g, cfg, _rng(4, r)).values[:, 0]
            prods[r] = v[1] * v[2]
        want = cov_rh(0.5, 1.0, cfg.hurst)
        assert want == pytest.approx(0.5, rel=1e-12)
        se = prods.std() / math.sqrt(R)
        assert abs(prods.mean() - want) <= 4 * se

    def test_brownian_increment_independence(self):
        cfg = ModelConfig(0.5, 2)
        g = TimeGrid(1.0, 4)
        R = 10_000
        inc = np.empty((R, 2))
        for r in range(R):
            v = sample_cholesky(g, cfg, _rng(5, r)).values[:, 0]
            inc[r] = (v[1] - v[0], v[3] - v[2])
        corr = np.corrcoef(inc.T)[0, 1]
        assert abs(corr) <= 4.0 / math.sqrt(R)


class TestCirculant:
    def test_matches_cholesky_distribution(self):
        cfg = ModelConfig(0.75, 2)
        g = TimeGrid(1.0, 64)
        R = 4000
        a = np.array([sample_cholesky(g, cfg, _rng(6, r)).values[-1, 0] for r in range(R)])
        b = np.array([sample_circulant(g, cfg, _rng(7, r)).values[-1, 0] for r in range(R)])
        assert ks_2samp(a, b).pvalue > 0.001

    def test_brownian_kurtosis(self):
        cfg = ModelConfig(0.5, 2)
        g = TimeGrid(1.0, 256)
        inc = np.diff(sample_circulant(g, cfg, _rng(8)).values[:, 0]) / math.sqrt(g.step)
        kurt = np.mean(inc**4) / np.mean(inc**2) ** 2
        assert abs(kurt - 3.0) <= 4 * math.sqrt(24.0 / inc.size)

    def test_coordinate_independence(self):
        cfg = ModelConfig(0.6, 3)
        g = TimeGrid(1.0, 32)
        R = 5000
        last = np.array([sample_circulant(g, cfg, _rng(9, r)).values[-1] for r in range(R)])
        c = np.corrcoef(last.T)
        off = c[np.triu_indices(3, 1)]
        assert np.all(np.abs(off) <= 4.0 / math.sqrt(R))


class TestSamplePair:
    def test_deterministic(self):
        g = TimeGrid(1.0, 32)
        cfg = ModelConfig(0.4, 2)
        p1 = sample_pair(g, cfg, 42)
        p2 = sample_pair(g, cfg, 42)
        np.testing.assert_array_equal(p1.first.values, p2.first.values)
        np.testing.assert_array_equal(p1.second.values, p2.second.values)
        assert p1.seed == 42

    def test_paths_differ(self):
        p = sample_pair(TimeGrid(1.0, 32), ModelConfig(0.4, 2), 42)
        assert not np.array_equal(p.first.values, p.second.values)

    def test_seeds_differ(self):
        g = TimeGrid(1.0, 32)
        cfg = ModelConfig(0.4, 2)
        assert not np.array_equal(
            sample_pair(g, cfg, 1).first.values, sample_pair(g, cfg, 2).first.values
        )

    def test_independence_of_paths(self):
        g = TimeGrid(1.0, 8)
        cfg = ModelConfig(0.6, 2)
        R = 5000
        prods = np.empty(R)
        for r in range(R):
            p = sample_pair(g, cfg, np.random.SeedSequence(entropy=10, spawn_key=(r,)))
            prods[r] = p.first.values[-1, 0] * p.second.values[-1, 0]
        se = prods.std() / math.sqrt(R)
        assert abs(prods.mean()) <= 4 * se

    def test_bad_method(self):
        with pytest.raises(ParameterError):
            sample_pair(TimeGrid(1.0, 8), ModelConfig(0.5, 2), 0, method="spectral")


class TestPathCsv:
    def test_header_and_rows(self):
        p = FbmPath(TimeGrid(1.0, 2), 0.5, np.arange(6, dtype=float).reshape(3, 2))
        buf = io.StringIO()
        path_to_csv(p, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "time,x1,x2"
        assert len(lines) == 4
        assert lines[1].startswith("0.0,0.0,1.0")
