#!/usr/bin/env python3
"""
Kernel benchmark: numba backend vs the pure-numpy fallback.

Times path-table derivation for one block and the batched corruption scan used
by the Monte Carlo driver, checks both backends agree, and prints JSON.

    python benchmarks/bench_kernels.py --n 256 --trials 200
"""

import argparse
import json
import statistics
import time

import numpy as np

from pathfair import kernels
from pathfair.kernels import numba_backend, numpy_backend

RUNS = 3


def timed(fn, *args, runs=RUNS):
    fn(*args)  # warm-up, includes numba compilation or cache load
    times = []
    result = None
    for _ in range(runs):
        start = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - start)
    return result, statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--q", type=int, default=24)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    if numba_backend is None:
        raise SystemExit("numba backend unavailable (PATHFAIR_NUMBA=0 or numba missing)")

    rng = np.random.default_rng(args.seed)
    n, q, k = args.n, args.q, args.k
    t = -(-2 * q // 3)
    seed_w = kernels.seed_words(rng.bytes(32))
    ids = np.arange(n, dtype=np.int64)

    seeds = rng.integers(0, 2**32, size=(args.trials, 8), dtype=np.uint64).astype(np.uint32)
    blocks = rng.integers(0, 2**40, size=args.trials, dtype=np.int64)
    corrupt = np.zeros((args.trials, n), dtype=np.bool_)
    for row in corrupt:
        row[rng.choice(n, size=n // 3, replace=False)] = True
    paths = min(n, 16)

    results = {"n": n, "q": q, "k": k, "trials": args.trials, "benchmarks": {}}
    for name, args_ in [
        ("path_table", (seed_w, 7, n, q, k, ids)),
        ("any_corrupted_path", (seeds, blocks, corrupt, n, q, t, k, paths)),
    ]:
        fast, t_fast = timed(getattr(numba_backend, name), *args_)
        slow, t_slow = timed(getattr(numpy_backend, name), *args_)
        results["benchmarks"][name] = {
            "numba_s": round(t_fast, 6),
            "numpy_s": round(t_slow, 6),
            "speedup": round(t_slow / t_fast, 2) if t_fast > 0 else None,
            "identical": bool(np.array_equal(fast, slow)),
        }

    print(json.dumps(results, indent=2))


if __name__ == "__main__":
    main()
