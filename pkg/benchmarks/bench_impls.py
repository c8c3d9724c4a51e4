"""Timing comparison of the jitted and pure-NumPy hot-kernel paths.

Run:  python3 benchmarks/bench_impls.py [--repeat N]

Covers the Godunov sweeping pass, the CG stencil apply, the tail-repair
relaxation pass, and K0 evaluation over a grid.  The jitted numbers include
no compilation time (one warmup call precedes timing).
"""

import argparse
import time

import numpy as np

from eiko import bessel
from eiko._accel import USE_NUMBA
from eiko.field import GridSpec, ScalarField, SourceSet
from eiko.sparse import (
    _tail_pass_loops,
    _tail_pass_wavefront,
    apply_stencil_loops,
    apply_stencil_numpy,
    assemble,
)
from eiko.sweep import SweepConfig, sweep_solve


def timeit(fn, repeat):
    fn()  # warmup (jit compile, caches)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, jitted, fallback):
    speedup = fallback / jitted if jitted > 0 else float("inf")
    print(f"{name:<34} {jitted * 1e3:>10.2f} {fallback * 1e3:>12.2f} {speedup:>9.1f}x")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=257)
    args = ap.parse_args()

    if not USE_NUMBA:
        print("numba is disabled (EIKO_PURE_NUMPY set?); nothing to compare")
        return

    n = args.size
    rng = np.random.default_rng(0)
    grid = GridSpec((n, n), (0.0, 0.0), (1.0, 1.0))
    f = ScalarField(grid, rng.uniform(0.5, 2.0, size=(n, n)))
    src = SourceSet((grid.center_index(),))

    print(f"grid {n}x{n}, best of {args.repeat}")
    print(f"{'kernel':<34} {'numba (ms)':>10} {'numpy (ms)':>12} {'speedup':>10}")

    cfg = SweepConfig(sweeps=4)
    row(
        "sweep_solve (4 full passes)",
        timeit(lambda: sweep_solve(f, src, cfg, use_numba=True), args.repeat),
        timeit(lambda: sweep_solve(f, src, cfg, use_numba=False), args.repeat),
    )

    sys = assemble(f, src, hbar=2.0)
    x = rng.normal(size=(n, n))
    row(
        "stencil apply (x100)",
        timeit(lambda: [apply_stencil_loops(sys.diag, sys.off, x) for _ in range(100)], args.repeat),
        timeit(lambda: [apply_stencil_numpy(sys.diag, sys.off, x) for _ in range(100)], args.repeat),
    )

    repair = np.zeros((n, n), dtype=bool)
    repair[n // 2 :, :] = True
    xr = np.abs(rng.normal(size=(n, n)))

    def tail(fn):
        def run():
            y = xr.copy()
            for flips in ((False, False), (False, True), (True, False), (True, True)):
                fn(y, sys.diag, sys.off, sys.rhs, repair, *flips)

        return run

    row(
        "tail repair (4 orderings)",
        timeit(tail(_tail_pass_loops), args.repeat),
        timeit(tail(_tail_pass_wavefront), args.repeat),
    )

    xs = rng.uniform(0.01, 20.0, size=n * n)

    def k0_scalar_all():
        out = np.empty_like(xs)
        for i in range(xs.size):
            out[i] = bessel.k0_scalar(xs[i])
        return out

    row(
        "K0 over grid",
        timeit(k0_scalar_all, args.repeat),
        timeit(lambda: bessel.k0(xs), args.repeat),
    )


if __name__ == "__main__":
    main()
