"""Benchmark: compiled kernels vs the numpy fallback.

The three kernels below dominate batch-mode runtime: the stepwise candidate
scans (one weighted fit per candidate per step per explanation), the IRLS
logistic fits, and the pool distance computations. Run:

    python benchmarks/bench_kernels.py

Sizes mirror production use: neighbourhoods of 200 points with weights,
candidate pools around 40 terms (8 features: linear + quadratic +
interactions), LIME-scale scans over 15k rows, and 50k-point pools.
"""
import time

import numpy as np

from bcx._core import kernels_py

try:
    from bcx._core import _kernels as compiled
except ImportError:
    compiled = None


def timeit(fn, *args, repeat=5, number=10):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def cases():
    rng = np.random.default_rng(0)

    def c(n, k, m):
        D = np.ascontiguousarray(rng.normal(size=(n, k)))
        C = np.ascontiguousarray(rng.normal(size=(n, m)))
        y = np.ascontiguousarray(rng.uniform(0.05, 0.95, n))
        w = np.ascontiguousarray(rng.choice([1.0, 10.0], n, p=[0.95, 0.05]))
        off = np.ascontiguousarray(np.zeros(n))
        beta = np.zeros(k)
        return D, C, y, w, off, beta

    n200 = c(200, 7, 40)
    n15k = c(15000, 7, 8)
    yield "ols_scan n=200 k=7 m=40", lambda kern: kern.ols_scan(*n200[:4])
    yield "ols_scan n=15000 k=7 m=8 (lime)", lambda kern: kern.ols_scan(*n15k[:4])
    yield "logistic_scan n=200 k=7 m=40", lambda kern: kern.logistic_scan(
        n200[0], n200[1], n200[2], n200[3], n200[4], n200[5]
    )
    yield "irls_fit n=200 k=14", lambda kern: kern.irls_fit(
        np.ascontiguousarray(np.hstack([n200[0], n200[0]])), n200[2], n200[3], n200[4]
    )
    X50k = np.ascontiguousarray(np.random.default_rng(1).normal(size=(50000, 10)))
    x0 = np.ascontiguousarray(X50k[0])
    yield "sq_distances n=50000 p=10", lambda kern: kern.sq_distances(X50k, x0)


def main():
    if compiled is None:
        print("compiled extension not built; benchmarking the fallback only")
    header = f"{'kernel':<36} {'numpy':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in cases():
        t_py = timeit(call, kernels_py)
        if compiled is not None:
            t_c = timeit(call, compiled)
            print(f"{name:<36} {t_py * 1e3:>8.3f}ms {t_c * 1e3:>8.3f}ms {t_py / t_c:>7.1f}x")
        else:
            print(f"{name:<36} {t_py * 1e3:>8.3f}ms {'n/a':>10} {'n/a':>8}")


if __name__ == "__main__":
    main()
