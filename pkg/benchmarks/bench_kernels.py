"""Benchmark the numba backward-Euler kernel against the numpy fallback.

Steps a Barenblatt-driven physical run at several grid sizes with both
implementations and reports the per-step timings.  The numba path is what
FDE_NUMBA=1 (default) selects; FDE_NUMBA=0 falls back to numpy/scipy.

Usage: python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from fde._kernels import USING_NUMBA, newton_step, newton_step_numpy
from fde.evolution import barenblatt_oracle, build_grid
from fde.params import ModelParams


def bench(step_fn, N, n_steps=200, dt=1e-3):
    p = ModelParams(n=3, m=0.2, beta=-1.0)
    grid = build_grid(math.e ** 2, N)
    einv, ap, am = grid.coeffs(3)
    u = barenblatt_oracle(grid.r, 0.0, 1.0, 1.0, p)
    # warm-up (includes JIT compile on the numba path)
    step_fn(u, dt, u[0], u[-1], 0.2, 10.0, einv, ap, am, 0.0, 0.0, 1e-11, 50)
    t0 = time.perf_counter()
    t = 0.0
    for _ in range(n_steps):
        bc = barenblatt_oracle(np.array([grid.r[0], grid.r[-1]]), t + dt, 1.0, 1.0, p)
        u, _, ok = step_fn(u, dt, bc[0], bc[1], 0.2, 10.0, einv, ap, am,
                           0.0, 0.0, 1e-11, 50)
        assert ok
        t += dt
    return (time.perf_counter() - t0) / n_steps


def main():
    if not USING_NUMBA:
        print("note: FDE_NUMBA=0 or numba unavailable; 'default' is the numpy path")
    print(f"{'N':>7} {'numba (ms/step)':>16} {'numpy (ms/step)':>16} {'speedup':>8}")
    for N in (501, 2001, 8001):
        t_nb = bench(newton_step, N) * 1e3
        t_np = bench(newton_step_numpy, N) * 1e3
        print(f"{N:>7} {t_nb:>16.3f} {t_np:>16.3f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
