#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N] [--sizes 4,8,16]

The first numba call per signature is done before timing so compilation
(or cache loading) is excluded.
"""
import argparse
import time

import numpy as np

from relayframe import _kernels


def _inputs(rng, n):
    M = rng.standard_normal((n, n))
    sym = 0.5 * (M + M.T)
    spd = M @ M.T + n * np.eye(n)
    return {
        "jacobi": (sym, 1e-12, 100),
        "mgs": (rng.standard_normal((n, n)), 1e-10),
        "cholesky": (spd,),
        "gram": (rng.standard_normal((32, n, n)), rng.uniform(0.5, 2.0, 32)),
    }


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        # jacobi works in place on some paths; give every run a fresh copy
        a = tuple(x.copy() if isinstance(x, np.ndarray) else x for x in args)
        t0 = time.perf_counter()
        fn(*a)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--sizes", default="4,8,16")
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    print(f"{'kernel':<10}{'n':>4}{'numba [us]':>14}{'numpy [us]':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, inp in _inputs(rng, n).items():
            nb, npf = _kernels.NUMBA[name], _kernels.NUMPY[name]
            nb(*inp)  # compile / load cache
            t_nb = _best(nb, inp, args.repeat)
            t_np = _best(npf, inp, args.repeat)
            print(f"{name:<10}{n:>4}{t_nb * 1e6:>14.1f}{t_np * 1e6:>14.1f}{t_np / t_nb:>10.1f}x")


if __name__ == "__main__":
    main()
