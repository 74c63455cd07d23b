#!/usr/bin/env python3
"""Benchmark the compiled manifold kernels against the numpy fallback.

Times forward and backward of each hot kernel at pipeline-realistic sizes
(T snippets at ambient width n+1) and prints the per-call latency of both
backends with the speedup. Run after `pip install -e .`:

    python3 benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from hypervd import _kernels_py as kpy

try:
    from hypervd import _kernels as kext
except ImportError:
    kext = None


def timeit(fn, repeats):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def cases(t, n, rng):
    k = -1.0
    v = 1.5 * rng.standard_normal((t, n))
    points = kpy.lift_fwd(v, k)
    grad_p = rng.standard_normal(points.shape)
    grad_d = rng.standard_normal((t, t))
    weights = rng.uniform(0.1, 1.0, size=(t, t))
    sums = weights @ points
    logits = rng.standard_normal((t, t))
    mask = (rng.random((t, t)) > 0.4).astype(float)
    mask[np.diag_indices(t)] = 1.0
    probs = kpy.masked_row_softmax_fwd(logits, mask)
    return [
        ("lift fwd", lambda m: m.lift_fwd(v, k)),
        ("lift bwd", lambda m: m.lift_bwd(v, k, grad_p)),
        ("pairwise_geodesic fwd", lambda m: m.pairwise_geodesic_fwd(points, k)),
        ("pairwise_geodesic bwd", lambda m: m.pairwise_geodesic_bwd(points, k, grad_d)),
        ("timelike_normalize fwd", lambda m: m.timelike_normalize_fwd(sums, k)),
        ("timelike_normalize bwd", lambda m: m.timelike_normalize_bwd(sums, k, grad_p)),
        ("masked_row_softmax fwd", lambda m: m.masked_row_softmax_fwd(logits, mask)),
        ("masked_row_softmax bwd", lambda m: m.masked_row_softmax_bwd(probs, mask, grad_d)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    if kext is None:
        print("compiled kernels unavailable; install with the Cython extension built")
        return
    rng = np.random.default_rng(0)
    for t, n in ((32, 256), (64, 256), (128, 32)):
        print(f"\nT={t}, spatial width n={n}")
        print(f"{'kernel':26s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
        for name, call in cases(t, n, rng):
            t_py = timeit(lambda: call(kpy), args.repeats)
            t_ext = timeit(lambda: call(kext), args.repeats)
            print(
                f"{name:26s} {t_py * 1e6:10.1f}us {t_ext * 1e6:10.1f}us "
                f"{t_py / t_ext:8.2f}x"
            )


if __name__ == "__main__":
    main()
