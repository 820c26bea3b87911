"""Compare the compiled and pure-Python line-of-sight kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 32 64 128] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from radiosem._kernels import backends


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    found = backends()
    if "cython" not in found:
        print("compiled backend not built; only the python backend is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'size':>6} {'backend':>8} {'seconds':>10} {'speedup':>8}")
    for n in args.sizes:
        grid = (rng.random((n, n)) < 0.2).astype(np.uint8)
        tx, ty = n // 3, n // 2
        ref = None
        times = {}
        for name, mod in found.items():
            out = mod.los_ratio_field(grid, tx, ty)
            if ref is None:
                ref = out
            elif not np.array_equal(out, ref):
                raise SystemExit(f"backend {name} disagrees at size {n}")
            times[name] = _time(lambda m=mod: m.los_ratio_field(grid, tx, ty), args.repeat)
        base = times["python"]
        for name, t in times.items():
            print(f"{n:>6} {name:>8} {t:>10.4f} {base / t:>7.1f}x")


if __name__ == "__main__":
    main()
