"""Benchmark the compiled kernel against the pure-numpy fallback.

Times the weighted Gaussian kernel sum (the hot loop of the local time
discretization) on both backends across grid sizes and checks they agree.

Run: python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

from fbmilt import _kernels_py

try:
    from fbmilt import _kernels
except ImportError:
    _kernels = None


def bench(fn, x, y, w, eps, min_time=0.3):
    fn(x, y, w, w, eps)  # warm up
    reps = 0
    t0 = time.perf_counter()
    while time.perf_counter() - t0 < min_time:
        val = fn(x, y, w, w, eps)
        reps += 1
    return (time.perf_counter() - t0) / reps, val


def main():
    rng = np.random.default_rng(0)
    eps = 0.05
    print(f"{'n':>6} {'d':>3} {'numpy (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for n in (256, 1024, 4096):
        for d in (2, 3):
            x = rng.standard_normal((n + 1, d))
            y = rng.standard_normal((n + 1, d))
            w = np.full(n + 1, 1.0 / n)
            t_py, v_py = bench(_kernels_py.gauss_weight_sum, x, y, w, eps)
            if _kernels is None:
                print(f"{n:>6} {d:>3} {t_py * 1e3:>12.2f} {'n/a':>12} {'n/a':>8}")
                continue
            t_cy, v_cy = bench(_kernels.gauss_weight_sum, x, y, w, eps)
            assert abs(v_py - v_cy) <= 1e-10 * max(1.0, abs(v_py)), (v_py, v_cy)
            print(f"{n:>6} {d:>3} {t_py * 1e3:>12.2f} {t_cy * 1e3:>12.2f} "
                  f"{t_py / t_cy:>8.2f}x")
    if _kernels is None:
        print("compiled extension not available; only the fallback was timed")


if __name__ == "__main__":
    main()
