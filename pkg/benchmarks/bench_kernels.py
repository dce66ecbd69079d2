#!/usr/bin/env python3
"""Benchmark the numba and pure-numpy kernel paths.

Runs each hot kernel through both implementations and prints a comparison
table.  The selected default path depends on GROUPSIGHT_DISABLE_NUMBA; this
script always times both explicitly.
"""

from __future__ import annotations

import time

import numpy as np

from groupsight import kernels


def time_it(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_levenshtein():
    rng = np.random.default_rng(1)
    alphabet = np.array([ord(c) for c in "abcdefghij "], dtype=np.int32)
    pairs = [
        (rng.choice(alphabet, size=400).astype(np.int32), rng.choice(alphabet, size=400).astype(np.int32))
        for _ in range(20)
    ]

    def run_jit():
        for a, b in pairs:
            kernels._levenshtein_jit(a, b)

    def run_numpy():
        for a, b in pairs:
            kernels._levenshtein_numpy(a, b)

    rows = []
    if kernels.using_numba():
        kernels._levenshtein_jit(pairs[0][0], pairs[0][1])  # warm up JIT
        rows.append(("levenshtein 20x400x400", "numba", time_it(run_jit)))
    rows.append(("levenshtein 20x400x400", "numpy", time_it(run_numpy)))
    return rows


def bench_bootstrap():
    rng = np.random.default_rng(2)
    n_units = 70
    m = rng.integers(2, 4, size=n_units).astype(np.float64)
    values = [rng.uniform(0, 100, size=int(k)) for k in m]
    s1 = np.array([v.sum() for v in values])
    s2 = np.array([(v**2).sum() for v in values])
    do = 2.0 * (m * s2 - s1 * s1) / (m - 1.0)
    draws = rng.integers(0, n_units, size=(10000, n_units), dtype=np.int64)

    rows = []
    if kernels.using_numba():
        kernels._bootstrap_alphas_jit(draws[:10], m, s1, s2, do)  # warm up JIT
        rows.append(("bootstrap 10k x 70 units", "numba", time_it(kernels._bootstrap_alphas_jit, draws, m, s1, s2, do)))
    rows.append(("bootstrap 10k x 70 units", "numpy", time_it(kernels._bootstrap_alphas_numpy, draws, m, s1, s2, do)))
    return rows


def main():
    print(f"numba available: {kernels.using_numba()}")
    rows = bench_levenshtein() + bench_bootstrap()
    width = max(len(r[0]) for r in rows)
    print(f"\n{'kernel':<{width}}  {'path':<6}  best (ms)")
    print("-" * (width + 22))
    by_kernel: dict[str, dict[str, float]] = {}
    for name, path, seconds in rows:
        by_kernel.setdefault(name, {})[path] = seconds
        print(f"{name:<{width}}  {path:<6}  {seconds * 1000:9.2f}")
    for name, times in by_kernel.items():
        if "numba" in times and "numpy" in times:
            print(f"\n{name}: numpy/numba ratio = {times['numpy'] / times['numba']:.1f}x")


if __name__ == "__main__":
    main()
