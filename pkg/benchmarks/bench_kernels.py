#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs exact colouring and weighted-independent-set search on sampled graphs
with both backends and prints a timing table plus the speedup.  Results are
asserted identical, so this doubles as a coarse parity check.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from sbmchroma import _kernels_py as kpy
from sbmchroma.graphs import sample_sbm
from sbmchroma.model import ModelInstance

try:
    from sbmchroma import _kernels_cy as kcy
except ImportError:
    kcy = None


def _bench(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="smaller instances (CI-friendly)")
    args = ap.parse_args()

    if kcy is None:
        print("compiled kernels unavailable; nothing to compare")
        return

    color_sizes = [30, 40, 50] if args.quick else [40, 50, 60]
    wis_sizes = [24, 30] if args.quick else [30, 36, 40]

    print(f"{'task':<28}{'n':>5}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for n in color_sizes:
        g = sample_sbm(ModelInstance.gnp(n, 0.5), seed=1000 + n)
        adj = g.adjacency_bits()
        t_py, r_py = _bench(kpy.exact_coloring, n, adj, 10 ** 9, repeats=1)
        t_cy, r_cy = _bench(kcy.exact_coloring, n, adj, 10 ** 9)
        assert r_py == r_cy, "backend results diverge"
        print(f"{'exact colouring (chi=' + str(r_cy[1]) + ')':<28}{n:>5}"
              f"{t_py:>12.3f}{t_cy:>12.3f}{t_py / max(t_cy, 1e-9):>9.1f}x")

    rng = np.random.default_rng(7)
    for n in wis_sizes:
        g = sample_sbm(ModelInstance.gnp(n, 0.5), seed=2000 + n)
        adj = g.adjacency_bits()
        w = rng.uniform(0.0, 1.0, (n, n))
        w = (w + w.T) / 2.0
        np.fill_diagonal(w, 0.0)
        flat = [float(v) for v in w.ravel()]
        t_py, r_py = _bench(kpy.best_weighted_independent_set,
                            n, adj, flat, 10 ** 8, repeats=1)
        t_cy, r_cy = _bench(kcy.best_weighted_independent_set,
                            n, adj, flat, 10 ** 8)
        assert r_py == r_cy, "backend results diverge"
        print(f"{'weighted indep set':<28}{n:>5}"
              f"{t_py:>12.3f}{t_cy:>12.3f}{t_py / max(t_cy, 1e-9):>9.1f}x")


if __name__ == "__main__":
    main()
