"""Time the compiled and numpy VAR recursion kernels on the same inputs.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

The compiled column is skipped when the extension is not built.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from gvarspill import _kernels_py

try:
    from gvarspill import _kernels
except ImportError:  # extension not built
    _kernels = None

CASES = [
    # (label, p, N, T, R) with R = 0 meaning the single-path kernel
    ("irf  N=50 p=2 H=48", 2, 50, 49, 0),
    ("sim  N=5  p=2 T=2200", 2, 5, 2200, 0),
    ("sim  N=50 p=2 T=360", 2, 50, 360, 0),
    ("batch N=25 p=1 T=200 R=50", 1, 25, 200, 50),
    ("batch N=5 p=2 T=400 R=200", 2, 5, 400, 200),
]


def make_inputs(p, N, T, R, seed=0):
    rng = np.random.default_rng(seed)
    F = rng.normal(scale=0.3 / (N * p) ** 0.5, size=(p, N, N))
    X = rng.normal(size=(R, T, N) if R else (T, N))
    return F, X


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    n, _ = timer.autorange()
    return min(timer.repeat(repeat, n)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'case':<28}{'python [ms]':>13}{'cython [ms]':>13}{'speedup':>9}")
    for label, p, N, T, R in CASES:
        F, X = make_inputs(p, N, T, R)
        name = "var_recursion_batch" if R else "var_recursion"
        py = getattr(_kernels_py, name)
        t_py = best_time(lambda: py(F, X, p), args.repeat)
        if _kernels is None:
            print(f"{label:<28}{t_py * 1e3:>13.3f}{'n/a':>13}{'':>9}")
            continue
        cy = getattr(_kernels, name)
        np.testing.assert_allclose(cy(F, X, p), py(F, X, p), rtol=1e-10, atol=1e-10)
        t_cy = best_time(lambda: cy(F, X, p), args.repeat)
        print(f"{label:<28}{t_py * 1e3:>13.3f}{t_cy * 1e3:>13.3f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
