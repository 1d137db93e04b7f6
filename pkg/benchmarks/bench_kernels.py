#!/usr/bin/env python3
"""Benchmark the compiled evaluation kernels against the pure NumPy
fallback on the workloads that dominate verification runtime.

Usage:
    python benchmarks/bench_kernels.py [--terms 8192] [--points 10000]
                                       [--repeats 3]

The two backends implement identical arithmetic, so the output also
reports the maximum absolute difference (expected: 0).
"""

import argparse
import time

import numpy as np

from eigenfree._kernels import _pykernels

try:
    from eigenfree._kernels import _compiled
except ImportError:
    _compiled = None


def make_workload(terms: int, points: int):
    rng = np.random.default_rng(31)
    lam = rng.uniform(0, 1, terms) + 1j * rng.uniform(0, 1, terms)
    coef = (rng.normal(size=terms) + 1j * rng.normal(size=terms)) * 1e-4
    mus = lam + 1e-6 * (rng.normal(size=terms)
                        + 1j * rng.normal(size=terms))
    zs = rng.uniform(-1, 2, points) + 1j * rng.uniform(1.1, 2.5, points)
    w2 = np.abs(coef) ** 2
    return lam, coef, mus, zs, w2


def bench(fn, args, repeats: int) -> tuple[float, np.ndarray]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--terms", type=int, default=8192)
    ap.add_argument("--points", type=int, default=10_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    lam, coef, mus, zs, w2 = make_workload(args.terms, args.points)
    cases = [
        ("pf_eval (1 - sum c/(z-lam))", "pf_eval", (lam, coef, zs)),
        ("prod_eval (prod (z-mu)/(z-lam))", "prod_eval", (lam, mus, zs)),
        ("resolvent_sum (sum w/|z-lam|^2)", "resolvent_sum", (w2, lam, zs)),
    ]
    print(f"terms={args.terms} points={args.points} "
          f"(best of {args.repeats})")
    header = f"{'kernel':34} {'pure':>9} {'compiled':>9} " \
             f"{'speedup':>8} {'max|diff|':>10}"
    print(header)
    print("-" * len(header))
    for label, name, a in cases:
        t_pure, out_pure = bench(getattr(_pykernels, name), a, args.repeats)
        if _compiled is None:
            print(f"{label:34} {t_pure:8.3f}s {'n/a':>9} {'n/a':>8} "
                  f"{'n/a':>10}")
            continue
        t_comp, out_comp = bench(getattr(_compiled, name), a, args.repeats)
        diff = float(np.max(np.abs(out_pure - out_comp)))
        print(f"{label:34} {t_pure:8.3f}s {t_comp:8.3f}s "
              f"{t_pure / t_comp:7.1f}x {diff:10.3g}")
    if _compiled is None:
        print("\ncompiled backend unavailable; build it with "
              "`python setup.py build_ext --inplace`")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
