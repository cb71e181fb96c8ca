"""Timing comparison of the compiled and pure-python kernel backends.

Runs the three hot kernels on representative shapes (n=1024 codec and
certification workloads) against every importable backend and prints the
best-of-N wall times plus the compiled-over-python speedup.
"""
import argparse
import time

import numpy as np

from crashclique import kernels
from crashclique._pykern import vander


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_workloads(args):
    rng = np.random.default_rng(args.seed)
    p, N, K = 1031, args.n, args.k
    vmat = vander(p, N, K)
    msgs = rng.integers(0, p, size=(args.batch, K), dtype=np.int64)
    xs = np.sort(rng.choice(N, size=K, replace=False)).astype(np.int64)
    ys = rng.integers(0, p, size=K, dtype=np.int64)
    member = rng.random((args.n, args.n)) < 0.25
    subsets = rng.integers(0, args.n, size=(args.samples, 17), dtype=np.int64)
    return [
        (f"encode    [{args.batch}x{K} -> {N}]",
         lambda mod: mod.encode(msgs, vmat, p)),
        (f"interpolate    [K={K}]",
         lambda mod: mod.interpolate(xs, ys, p)),
        (f"certify_loads  [{args.samples}x17 over {args.n}]",
         lambda mod: mod.certify_loads(member, subsets, 2.8, 5.2)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--k", type=int, default=767)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--samples", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    found = kernels.backends()
    print(f"active backend: {kernels.BACKEND}   "
          f"(available: {', '.join(sorted(found))})")
    for label, call in build_workloads(args):
        times = {}
        for name, mod in sorted(found.items()):
            times[name] = best_of(args.repeats, lambda: call(mod))
        line = f"{label:42s}"
        for name in sorted(times):
            line += f"  {name} {times[name] * 1e3:9.2f} ms"
        if "compiled" in times and "python" in times:
            line += f"  speedup x{times['python'] / times['compiled']:.1f}"
        print(line)


if __name__ == "__main__":
    main()
