#!/usr/bin/env python3
"""Benchmark the compiled QP kernel against the pure-numpy reference.

Both backends implement the same dual coordinate-ascent contract; this
script times them on a range of least-norm margin instances and checks
that the objectives agree.

Usage: python benchmarks/bench_qp.py [--repeats N]
"""

import argparse
import time

import numpy as np

from skewlab import _qp_ref

try:
    from skewlab import _qp_ext
except ImportError:
    _qp_ext = None


def make_instance(kind: str, seed: int):
    rng = np.random.default_rng(seed)
    if kind == "two-feature n=256":
        n = 256
        inv = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        sp = np.where(rng.random(n) < 0.8, inv, -inv)
        X = np.stack([inv, sp], axis=1)
        y = inv.copy()
    elif kind == "two-feature n=4096":
        n = 4096
        inv = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        sp = np.where(rng.random(n) < 0.8, inv, -inv)
        X = np.stack([inv, sp], axis=1)
        y = inv.copy()
    elif kind == "gaussian n=50 d=101":
        n, d = 50, 101
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        X = rng.normal(0, 1, (n, d))
        X[:, 0] += 2.0 * y  # keep it separable
    elif kind == "narrow margin n=64":
        # Nearly colinear points with a thin separating slab: the dual
        # ascent needs many sweeps, which is where the kernels differ.
        n, d = 64, 3
        y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        X = rng.normal(0, 1, (n, d))
        X[:, 0] = y * (1.0 + 0.01 * rng.random(n))
        X[:, 1] = 50.0 * X[:, 0] + rng.normal(0, 1, n)
    else:
        raise ValueError(kind)
    return X, y.astype(float), np.ones(len(y))


def bench(kernel, X, y, c, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = kernel.solve_dual(X, y, c, False, 1e-8, 10**6, 1e12)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    kinds = (
        "two-feature n=256",
        "two-feature n=4096",
        "gaussian n=50 d=101",
        "narrow margin n=64",
    )
    print(f"{'instance':<24} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for kind in kinds:
        X, y, c = make_instance(kind, seed=0)
        t_ref, ref = bench(_qp_ref, X, y, c, args.repeats)
        if _qp_ext is None:
            print(f"{kind:<24} {t_ref * 1e3:>8.1f}ms {'-':>10} {'-':>8}")
            continue
        t_ext, ext = bench(_qp_ext, X, y, c, args.repeats)
        obj_ref = c @ ref[0] - 0.5 * ref[1] @ ref[1]
        obj_ext = c @ ext[0] - 0.5 * ext[1] @ ext[1]
        assert abs(obj_ref - obj_ext) <= 1e-6 * max(1.0, abs(obj_ref)), (
            f"objective mismatch on {kind}: {obj_ref} vs {obj_ext}"
        )
        print(
            f"{kind:<24} {t_ref * 1e3:>8.1f}ms {t_ext * 1e3:>8.1f}ms "
            f"{t_ref / t_ext:>7.1f}x"
        )


if __name__ == "__main__":
    main()
