"""Benchmark the RK4 sweep kernels: numba-compiled vs pure Python/NumPy.

The solver's inner loop is a few thousand sequential RK4 steps repeated for
hundreds to thousands of sweep iterations, so kernel latency dominates end to
end runtime.  This script times one forward state sweep, one backward costate
sweep, and one cost quadrature on the default problem size for both backends.

Usage: python3 benchmarks/bench_kernels.py [--steps 6000] [--repeats 20]
"""

import argparse
import time

import numpy as np

from blochopt import _kernels
from blochopt.core import TimeGrid, target_trajectory


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=6000)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    try:
        from numba import njit
    except ImportError:
        raise SystemExit("numba is not installed; nothing to compare")

    grid = TimeGrid(0.0, 30.0, args.steps)
    t = grid.nodes()
    x0 = np.array([np.sqrt(2) / 2, np.sqrt(2) / 2, 1.0])
    controls = np.column_stack([0.3 * np.sin(0.8 * t), 1.0 + 0.2 * np.cos(0.5 * t)])
    targets = np.ascontiguousarray(target_trajectory(x0, t, 0.1))
    gamma0, n_mean, theta = 0.1, 0.5, 0.1
    lam_f = np.zeros(3)

    jit_forward = njit(cache=True)(_kernels._rk4_bloch_forward)
    jit_backward = njit(cache=True)(_kernels._rk4_costate_backward)
    jit_cost = njit(cache=True)(_kernels._trapezoid_cost)

    states, _ = jit_forward(x0, controls, grid.h, gamma0, n_mean)  # also compiles
    jit_backward(lam_f, states, targets, controls, grid.h, gamma0, n_mean)
    jit_cost(states, targets, controls, theta, grid.h)

    cases = [
        (
            "rk4 forward sweep",
            lambda: _kernels._rk4_bloch_forward(x0, controls, grid.h, gamma0, n_mean),
            lambda: jit_forward(x0, controls, grid.h, gamma0, n_mean),
        ),
        (
            "rk4 costate sweep",
            lambda: _kernels._rk4_costate_backward(
                lam_f, states, targets, controls, grid.h, gamma0, n_mean
            ),
            lambda: jit_backward(lam_f, states, targets, controls, grid.h, gamma0, n_mean),
        ),
        (
            "cost quadrature",
            lambda: _kernels._trapezoid_cost(states, targets, controls, theta, grid.h),
            lambda: jit_cost(states, targets, controls, theta, grid.h),
        ),
    ]

    print(f"steps={args.steps}  repeats={args.repeats}  (best of)")
    print(f"{'kernel':<20} {'python':>12} {'numba':>12} {'speedup':>9}")
    for name, py_fn, jit_fn in cases:
        t_py = best_of(py_fn, args.repeats)
        t_jit = best_of(jit_fn, args.repeats)
        print(f"{name:<20} {t_py * 1e3:>10.3f}ms {t_jit * 1e3:>10.3f}ms {t_py / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
