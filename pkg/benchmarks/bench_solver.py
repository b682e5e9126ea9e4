#!/usr/bin/env python3
"""Benchmark the compiled inner-dual solver against the pure-NumPy fallback.

Usage:
    python benchmarks/bench_solver.py [--repeats N]

Times raw dual solves across problem shapes and one end-to-end robust EL
fit per backend.  The compiled backend must be built (`python setup.py
build_ext --inplace` or a regular install) or it is reported as missing.
"""

import argparse
import time

import numpy as np

from relestim import _solver_py

try:
    from relestim import _solver_core
except ImportError:
    _solver_core = None


def time_solves(module, instances, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        for z in instances:
            module.solve_dual(z)
        best = min(best, (time.perf_counter() - start) / len(instances))
    return best


def bench_raw(repeats):
    rng = np.random.default_rng(12345)
    shapes = [(30, 2), (50, 2), (100, 5), (100, 6), (100, 15)]
    print(f"{'shape':>10} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for n, m in shapes:
        instances = [rng.standard_normal((n, m)) + 0.2 for _ in range(200)]
        t_py = time_solves(_solver_py, instances, repeats)
        if _solver_core is None:
            print(f"{n}x{m:>6} {t_py * 1e6:>10.1f}us {'missing':>12}")
            continue
        t_c = time_solves(_solver_core, instances, repeats)
        print(
            f"{n}x{m:>6} {t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
            f"{t_py / t_c:>8.1f}x"
        )


def bench_fit():
    import relestim as rl
    from relestim import inner

    rng = np.random.default_rng(99)
    X = rng.standard_normal((100, 5))
    beta = rng.standard_normal(5)
    y = X @ beta + rng.standard_normal(100)
    y[::10] += 20.0
    data = rl.Dataset(X, y)
    scale = rl.residual_scale(rl.ols_fit(data).residuals)

    backends = [(_solver_py, "python")]
    if _solver_core is not None:
        backends.append((_solver_core, "compiled"))
    print(f"\nend-to-end robust EL fit (n=100, k=5, 10% outliers):")
    for module, name in backends:
        saved = inner._BACKEND
        inner._BACKEND = module
        try:
            start = time.perf_counter()
            fit = rl.el_fit(data, rl.Robust(rl.PsiKernel.tukey(), scale))
            elapsed = time.perf_counter() - start
        finally:
            inner._BACKEND = saved
        print(f"  {name:>8}: {elapsed * 1e3:8.1f} ms ({fit.evaluations} profile evaluations)")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    if _solver_core is None:
        print("note: compiled backend not built; showing pure-NumPy timings only")
    bench_raw(args.repeats)
    bench_fit()
