#!/usr/bin/env python3
"""Benchmark the numba circuit kernels against the pure-numpy fallback.

Runs both implementations in-process on identical inputs and reports the
per-call time and speedup. The 26-row batch matches the training workload
(one evaluation per basis class); larger batches show the scaling.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from bosehub import _kernels
from bosehub.circuit import init_params


def time_call(fn, *args, repeats):
    fn(*args)  # warm-up (and jit compile on the first numba call)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    if _kernels.BACKEND != "numba":
        raise SystemExit(
            "numba backend inactive (BOSEHUB_BACKEND=numpy or numba missing); "
            "run with the default environment to compare both")

    rng = np.random.default_rng(0)
    cases = [
        ("compressed", 6, 26),
        ("compressed", 6, 252),
        ("quat", 6, 26),
        ("quat", 8, 26),
        ("quat", 8, 1024),
    ]
    print(f"{'kind':<12} {'layers':>6} {'batch':>6} "
          f"{'numba':>12} {'numpy':>12} {'speedup':>8}")
    for kind, layers, batch in cases:
        params = init_params(kind, layers, rng, scale=0.5)
        X = rng.uniform(-1.5, 1.5, (batch, 6))
        jit_fn = (_kernels._compressed_loop if kind == "compressed"
                  else _kernels._quat_loop)
        np_fn = (_kernels._compressed_numpy if kind == "compressed"
                 else _kernels._quat_numpy)
        t_jit = time_call(jit_fn, params.values, X, True, repeats=args.repeats)
        t_np = time_call(np_fn, params.values, X, True, repeats=args.repeats)

        out_jit = jit_fn(params.values, X, True)
        out_np = np_fn(params.values, X, True)
        for a, b in zip(out_jit, out_np):
            np.testing.assert_allclose(a, b, atol=1e-12)

        print(f"{kind:<12} {layers:>6} {batch:>6} "
              f"{t_jit * 1e6:>10.1f}us {t_np * 1e6:>10.1f}us "
              f"{t_np / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
