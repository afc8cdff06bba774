#!/usr/bin/env python
"""Benchmark of the compiled kernels against the numpy fallback.

Times the two hot operations of a stepwise path (candidate scoring and
the orthogonalization sweep) and a full selection run on a synthetic
problem, once per backend.  Run as a script:

    python benchmarks/bench_kernels.py [--n 2000] [--q 2000] [--steps 20]
"""

import argparse
import time

import numpy as np

from gcovsel.kernels import numpy_backend

try:
    from gcovsel.kernels import _ckernels
except ImportError:
    _ckernels = None


def bench_backend(backend, name, n, q, steps, seed):
    rng = np.random.default_rng(seed)
    Xw = np.ascontiguousarray(rng.standard_normal((q, n)))
    norms2 = np.einsum("ij,ij->i", Xw, Xw)
    min_norms2 = 1e-10 * norms2
    r = rng.standard_normal(n)
    active = np.arange(q, dtype=np.int64)

    t0 = time.perf_counter()
    for _ in range(steps):
        j, _gain = backend.best_gain(Xw, r, norms2, min_norms2, active)
        u = Xw[j] / np.sqrt(norms2[j])
        d = float(u @ r)
        r = r - d * u
        active = active[active != j]
        backend.sweep_project(Xw, norms2, u, active)
    dt = time.perf_counter() - t0
    print(f"{name:>8}: {steps} steps over ({n}, {q}) in {dt:.3f}s "
          f"({1e3 * dt / steps:.2f} ms/step)")
    return dt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--q", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t_np = bench_backend(numpy_backend, "numpy", args.n, args.q, args.steps, args.seed)
    if _ckernels is not None:
        t_c = bench_backend(_ckernels, "cython", args.n, args.q, args.steps, args.seed)
        print(f"speedup: {t_np / t_c:.2f}x")
    else:
        print("compiled kernels unavailable; numpy fallback only")


if __name__ == "__main__":
    main()
