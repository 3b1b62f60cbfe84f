"""Compiled vs numpy kernels on batches shaped like a desk-scale GRPO update.

    python benchmarks/bench_kernels.py [--points 4000] [--repeat 20]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from eccl import kernels
from eccl.policies.features import D


def make_batch(n_points: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    n_cands = rng.integers(8, 40, size=n_points)
    point_ptr = np.zeros(n_points + 1, dtype=np.int64)
    np.cumsum(n_cands, out=point_ptr[1:])
    n_rows = int(point_ptr[-1])
    row_len = rng.integers(2, 8, size=n_rows)
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(row_len, out=row_ptr[1:])
    feat_idx = rng.integers(0, D, size=int(row_ptr[-1])).astype(np.int64)
    chosen = np.array([rng.integers(0, c) for c in n_cands], dtype=np.int64)
    coef = rng.normal(size=n_points) / n_points
    theta = rng.normal(size=D)
    ref = theta + 0.1 * rng.normal(size=D)
    return theta, ref, row_ptr, feat_idx, point_ptr, chosen, coef, 0.01 / n_points


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=4000, help="decision points per batch")
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    batch = make_batch(args.points)
    impls = [("python", kernels.python_impl)]
    if kernels.compiled_impl is not None:
        impls.append(("cython", kernels.compiled_impl))
    else:
        print("compiled kernels unavailable; timing the numpy fallback only")

    ref_grad = kernels.python_impl.policy_grad(*batch)[0]
    times = {}
    for name, mod in impls:
        grad = mod.policy_grad(*batch)[0]
        err = float(np.max(np.abs(grad - ref_grad)))
        t = min(timeit.repeat(lambda: mod.policy_grad(*batch), number=1, repeat=args.repeat))
        lt = min(timeit.repeat(lambda: mod.logits(batch[0], batch[2], batch[3]), number=1, repeat=args.repeat))
        times[name] = t
        print(f"{name:7s} policy_grad {t * 1e3:8.3f} ms   logits {lt * 1e3:8.3f} ms   max|dgrad| {err:.1e}")
    if len(times) == 2:
        print(f"speedup (policy_grad): {times['python'] / times['cython']:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
