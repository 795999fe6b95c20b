"""Time the compiled network simplex against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --sizes 10 30 60 --repeats 5
"""

import argparse
import time

import numpy as np

from lpgw._simplex_py import transport_simplex as py_simplex

try:
    from lpgw._simplex import transport_simplex as cy_simplex
except ImportError:  # extension not built
    cy_simplex = None


def _instance(rng, n):
    a = rng.random(n) + 0.1
    b = rng.random(n) + 0.1
    b *= a.sum() / b.sum()
    return a, b, rng.random((n, n))


def _best(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 30, 60, 120])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    rng = np.random.default_rng(a.seed)
    print(f"{'n':>5} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for n in a.sizes:
        args = _instance(rng, n)
        tp = _best(py_simplex, args, a.repeats)
        if cy_simplex is None:
            print(f"{n:5d} {tp * 1e3:12.2f} {'n/a':>12} {'n/a':>8}")
            continue
        tc = _best(cy_simplex, args, a.repeats)
        print(f"{n:5d} {tp * 1e3:12.2f} {tc * 1e3:12.3f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
