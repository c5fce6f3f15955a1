#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the four hot kernels on representative workloads and prints one row
per (kernel, backend) with the speedup of the compiled path.  Run from the
repository root after an editable install:

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from uclab._kernels import _pykernels

try:
    from uclab._kernels import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    rng = np.random.default_rng(0)
    probs = rng.uniform(0.0, 1.0, 1_000_000)
    masses = rng.exponential(1.0, 1_000_000)
    masses /= masses.sum()
    q64 = rng.exponential(1.0, 64)
    q64 /= q64.sum()
    p64 = rng.uniform(0.0, 0.05, 64)
    table = rng.exponential(1.0, 1 << 20)
    table /= table.sum()

    def entropy_many(impl):
        impl.binary_entropy_many(probs)

    def entropy_sum(impl):
        impl.entropy_sum(masses)

    def instance_stats(impl):
        for _ in range(200):
            impl.instance_stats(q64, p64, 0.1)

    def union_square(impl):
        impl.subset_union_square(table, 20)

    return [
        ("binary_entropy_many (1e6)", entropy_many),
        ("entropy_sum (1e6)", entropy_sum),
        ("instance_stats (200 x size 64)", instance_stats),
        ("subset_union_square (n=20)", union_square),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _core is None:
        print("compiled kernels unavailable; timing the fallback only")
    header = f"{'kernel':<34} {'python':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, bench in workloads():
        py = best_of(lambda: bench(_pykernels), args.repeat)
        if _core is not None:
            cc = best_of(lambda: bench(_core), args.repeat)
            print(f"{name:<34} {py*1e3:>8.2f}ms {cc*1e3:>8.2f}ms {py/cc:>7.1f}x")
        else:
            print(f"{name:<34} {py*1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
