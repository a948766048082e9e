#!/usr/bin/env python3
"""Benchmark the numba-compiled hot kernels against their numpy fallbacks.

Times the batched 4x4 eigensolve (field sweeps, EPR scans) and the Gaussian
line synthesis (spectrum generation) on realistic problem sizes.  The first
numba call includes JIT compilation, so every kernel is warmed up before
timing.

Run: python benchmarks/bench_kernels.py
The YBCAWO4_NO_NUMBA=1 environment flag (checked at import) switches the
library itself to the numpy path; this script always times both.
"""

import time

import numpy as np

from ybcawo4 import _kernels


def timeit(fn, *args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_energies():
    print("batched manifold eigensolve (complex 4x4 per field)")
    print(f"{'n_fields':>10} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    rng = np.random.default_rng(0)
    for n in (1_000, 10_000, 100_000):
        fields = np.ascontiguousarray(rng.uniform(-0.5, 0.5, size=(n, 3)))
        args = (-0.78905, 3.08187, 14.738, 54.81, 0.00752)
        t_np = timeit(_kernels.manifold_energies_numpy, *args, fields)
        if _kernels.HAVE_NUMBA:
            _kernels.manifold_energies_numba(*args, fields[:64])  # warm-up
            t_nb = timeit(_kernels.manifold_energies_numba, *args, fields)
            print(f"{n:>10} {t_np * 1e3:>12.2f} {t_nb * 1e3:>12.2f} "
                  f"{t_np / t_nb:>8.2f}x")
        else:
            print(f"{n:>10} {t_np * 1e3:>12.2f} {'n/a':>12} {'n/a':>9}")


def bench_gaussians():
    print("\nGaussian line synthesis (lines x grid)")
    print(f"{'problem':>16} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    rng = np.random.default_rng(1)
    for n_lines, n_grid in ((20, 2_000), (20, 20_000), (200, 20_000)):
        grid = np.linspace(-5.0, 5.0, n_grid)
        centers = np.ascontiguousarray(rng.uniform(-4, 4, n_lines))
        weights = np.ascontiguousarray(rng.uniform(0, 1, n_lines))
        t_np = timeit(_kernels.gaussian_profile_numpy, grid, centers, weights, 0.136)
        label = f"{n_lines}x{n_grid}"
        if _kernels.HAVE_NUMBA:
            _kernels.gaussian_profile_numba(grid[:64], centers, weights, 0.136)
            t_nb = timeit(_kernels.gaussian_profile_numba, grid, centers,
                          weights, 0.136)
            print(f"{label:>16} {t_np * 1e3:>12.2f} {t_nb * 1e3:>12.2f} "
                  f"{t_np / t_nb:>8.2f}x")
        else:
            print(f"{label:>16} {t_np * 1e3:>12.2f} {'n/a':>12} {'n/a':>9}")


if __name__ == "__main__":
    print(f"numba available: {_kernels.HAVE_NUMBA}; "
          f"library path in use: {'numba' if _kernels.USE_NUMBA else 'numpy'}\n")
    bench_energies()
    bench_gaussians()
