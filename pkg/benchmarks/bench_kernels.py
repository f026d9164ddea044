"""Benchmark the compiled kernel backend against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [repeats]

The hot paths are the bivariate-normal probability and the separation
probability built from ~20 of them; the certifier evaluates the latter
millions of times, so the backend gap translates directly into wall time.
"""

import sys
import time

import numpy as np

from max3section import _pykernels

try:
    from max3section import _kernels
except ImportError:
    _kernels = None


def bench(fn, args_list, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best / len(args_list)


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    rng = np.random.default_rng(0)

    gamma_args = [(rng.uniform(-1, 1), rng.uniform(), rng.uniform())
                  for _ in range(20000)]
    cut_args = []
    for _ in range(2000):
        x = np.sort(rng.dirichlet([1, 1, 1]))
        w = np.sort(rng.dirichlet([1, 1, 1]))
        cut_args.append((x[0], x[1], w[0], w[1],
                         *rng.uniform(-1, 1, size=3)))

    backends = [("python", _pykernels)]
    if _kernels is not None:
        backends.append(("compiled", _kernels))

    print(f"{'kernel':<14} {'backend':<10} {'per call':>12}")
    baseline = {}
    for name, mod in backends:
        t = bench(mod.gamma_cdf, gamma_args, repeats)
        speedup = (f"  ({baseline['gamma'] / t:.1f}x)"
                   if "gamma" in baseline else "")
        baseline.setdefault("gamma", t)
        print(f"{'gamma_cdf':<14} {name:<10} {t * 1e6:>10.2f}us{speedup}")
    for name, mod in backends:
        t = bench(mod.cut_prob, cut_args, repeats)
        speedup = (f"  ({baseline['cut'] / t:.1f}x)"
                   if "cut" in baseline else "")
        baseline.setdefault("cut", t)
        print(f"{'cut_prob':<14} {name:<10} {t * 1e6:>10.2f}us{speedup}")

    if _kernels is not None:
        worst = max(abs(_kernels.gamma_cdf(*a) - _pykernels.gamma_cdf(*a))
                    for a in gamma_args[:5000])
        print(f"\nmax |compiled - python| over 5000 gamma calls: {worst:.2e}")


if __name__ == "__main__":
    main()
