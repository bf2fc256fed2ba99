"""Benchmark the compiled SGD kernels against the pure-NumPy fallback.

Usage: python3 scripts/benchmark_kernels.py [--steps 300]
"""

import argparse
import time

import numpy as np

from eqlab import _pykernels

try:
    from eqlab import _ckernels
except ImportError:
    _ckernels = None


def bench_backend(impl, m, D, N, steps):
    rng = np.random.default_rng(0)
    a = rng.normal(0, 1 / np.sqrt(m), m)
    W = rng.normal(0, 1 / np.sqrt(m), (m, D))
    a0, W0 = a.copy(), W.copy()
    X = np.ascontiguousarray(rng.normal(size=(N, D)))
    y = np.ascontiguousarray((rng.random(N) < 0.5).astype(np.float64))
    pref = 1.0 / np.sqrt(D / 2)
    impl.sgd_step_inplace(a, W, a0, W0, X, y, pref, 0.1)  # warm up
    t0 = time.perf_counter()
    for _ in range(steps):
        impl.sgd_step_inplace(a, W, a0, W0, X, y, pref, 0.1)
    return (time.perf_counter() - t0) / steps


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=300)
    args = parser.parse_args()

    shapes = [(1024, 128, 128), (1024, 512, 128), (1024, 1024, 128), (1024, 625, 128)]
    print(f"{'m':>6} {'D':>6} {'N':>5} {'python ms':>10} {'c ms':>8} {'speedup':>8}")
    for m, D, N in shapes:
        t_py = bench_backend(_pykernels, m, D, N, args.steps) * 1e3
        if _ckernels is not None:
            t_c = bench_backend(_ckernels, m, D, N, args.steps) * 1e3
            print(f"{m:>6} {D:>6} {N:>5} {t_py:>10.3f} {t_c:>8.3f} {t_py / t_c:>7.2f}x")
        else:
            print(f"{m:>6} {D:>6} {N:>5} {t_py:>10.3f} {'n/a':>8} {'n/a':>8}")


if __name__ == "__main__":
    main()
