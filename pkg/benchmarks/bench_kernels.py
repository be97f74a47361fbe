"""Timing of the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 200 800 2000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from ballmap import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    X = rng.normal(size=(n, 2))
    Y = X @ np.array([[2.0, 0.3], [0.1, 1.0]]) + 0.01 * rng.normal(size=(n, 2))
    Z = rng.normal(size=(n // 2, 2)) * 3
    h = n // 2
    return {
        "min_ratio_pairs": lambda impl: kernels.min_ratio_pairs(X, Y, impl=impl),
        "min_ratio_cross": lambda impl: kernels.min_ratio_cross(X[:h], Y[:h], X[h:], Y[h:], impl=impl),
        "pair_energy": lambda impl: kernels.pair_energy(Y, Z, 2.0, impl=impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 800, 2000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    impls = ["python"] + (["cython"] if kernels.HAVE_COMPILED else [])
    if len(impls) == 1:
        print("compiled kernels not built; timing the numpy fallback only")
    print(f"{'kernel':<18}{'n':>6}" + "".join(f"{i + ' [s]':>14}" for i in impls) + f"{'speedup':>10}")
    for n in args.sizes:
        for name, fn in cases(n, rng).items():
            t = [best_of(lambda: fn(i), args.repeat) for i in impls]
            ratio = f"{t[0] / t[1]:>10.1f}" if len(t) == 2 else ""
            print(f"{name:<18}{n:>6}" + "".join(f"{v:>14.4f}" for v in t) + ratio)


if __name__ == "__main__":
    main()
