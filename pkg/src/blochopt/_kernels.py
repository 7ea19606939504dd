"""Hot numeric loops: fixed-step RK4 sweeps over the Bloch and costate ODEs.

Each kernel is written as a plain scalar loop so a single source serves two
backends: by default the loops are JIT-compiled with numba; setting the
environment variable ``BLOCHOPT_BACKEND=numpy`` (or running without numba
installed) keeps them as ordinary Python/NumPy functions.  Results agree to
the last bit either way; only speed differs.  ``benchmarks/bench_kernels.py``
compares the two.

Controls are sampled at grid nodes; RK4 midpoint stages use the average of
the two adjacent node samples (linear interpolation at t + h/2).  The costate
sweep interpolates the sampled state and target trajectories the same way.

Kernels return a step index on numeric blow-up (-1 when clean); wrappers in
`integrate`/`optimizer` turn that into an exception.
"""

from __future__ import annotations

import math
import os

import numpy as np

BACKEND_ENV_VAR = "BLOCHOPT_BACKEND"


def _rk4_bloch_forward(x0, controls, h, gamma0, n_mean):
    """RK4 sweep of the controlled Bloch equation from node 0 to node n.

    x0: (3,) initial state; controls: (n+1, 2) node samples of (bx, bz).
    Returns (states (n+1, 3), bad_step), bad_step = -1 or the first step
    index producing a non-finite value.
    """
    n = controls.shape[0] - 1
    out = np.empty((n + 1, 3))
    a = 0.5 * (2.0 * n_mean + 1.0) * gamma0
    a3 = (2.0 * n_mean + 1.0) * gamma0
    y1, y2, y3 = x0[0], x0[1], x0[2]
    out[0, 0] = y1
    out[0, 1] = y2
    out[0, 2] = y3
    for k in range(n):
        bx0 = controls[k, 0]
        bz0 = controls[k, 1]
        bx1 = controls[k + 1, 0]
        bz1 = controls[k + 1, 1]
        bxm = 0.5 * (bx0 + bx1)
        bzm = 0.5 * (bz0 + bz1)

        k11 = -a * y1 + bz0 * y2
        k12 = -bz0 * y1 - a * y2 + bx0 * y3
        k13 = -bx0 * y2 - a3 * y3 - gamma0

        w1 = y1 + 0.5 * h * k11
        w2 = y2 + 0.5 * h * k12
        w3 = y3 + 0.5 * h * k13
        k21 = -a * w1 + bzm * w2
        k22 = -bzm * w1 - a * w2 + bxm * w3
        k23 = -bxm * w2 - a3 * w3 - gamma0

        w1 = y1 + 0.5 * h * k21
        w2 = y2 + 0.5 * h * k22
        w3 = y3 + 0.5 * h * k23
        k31 = -a * w1 + bzm * w2
        k32 = -bzm * w1 - a * w2 + bxm * w3
        k33 = -bxm * w2 - a3 * w3 - gamma0

        w1 = y1 + h * k31
        w2 = y2 + h * k32
        w3 = y3 + h * k33
        k41 = -a * w1 + bz1 * w2
        k42 = -bz1 * w1 - a * w2 + bx1 * w3
        k43 = -bx1 * w2 - a3 * w3 - gamma0

        y1 = y1 + (h / 6.0) * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        y2 = y2 + (h / 6.0) * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        y3 = y3 + (h / 6.0) * (k13 + 2.0 * k23 + 2.0 * k33 + k43)
        if not (math.isfinite(y1) and math.isfinite(y2) and math.isfinite(y3)):
            return out, k
        out[k + 1, 0] = y1
        out[k + 1, 1] = y2
        out[k + 1, 2] = y3
    return out, -1


def _rk4_costate_backward(lam_f, states, targets, controls, h, gamma0, n_mean):
    """RK4 sweep of the costate equation from node n down to node 0.

    The costate rate is -2*(x - x_ref) - A(u)^T lam; state, reference, and
    control samples share the grid and are linearly interpolated at midpoints.
    Returns (costates (n+1, 3), bad_step) with bad_step as in the forward
    sweep (index of the backward step, counted from node n).
    """
    n = controls.shape[0] - 1
    out = np.empty((n + 1, 3))
    a = 0.5 * (2.0 * n_mean + 1.0) * gamma0
    a3 = (2.0 * n_mean + 1.0) * gamma0
    l1, l2, l3 = lam_f[0], lam_f[1], lam_f[2]
    out[n, 0] = l1
    out[n, 1] = l2
    out[n, 2] = l3
    hh = -h
    for k in range(n, 0, -1):
        bx0 = controls[k, 0]
        bz0 = controls[k, 1]
        bx1 = controls[k - 1, 0]
        bz1 = controls[k - 1, 1]
        bxm = 0.5 * (bx0 + bx1)
        bzm = 0.5 * (bz0 + bz1)

        e01 = states[k, 0] - targets[k, 0]
        e02 = states[k, 1] - targets[k, 1]
        e03 = states[k, 2] - targets[k, 2]
        e11 = states[k - 1, 0] - targets[k - 1, 0]
        e12 = states[k - 1, 1] - targets[k - 1, 1]
        e13 = states[k - 1, 2] - targets[k - 1, 2]
        em1 = 0.5 * (e01 + e11)
        em2 = 0.5 * (e02 + e12)
        em3 = 0.5 * (e03 + e13)

        k11 = -2.0 * e01 + a * l1 + bz0 * l2
        k12 = -2.0 * e02 - bz0 * l1 + a * l2 + bx0 * l3
        k13 = -2.0 * e03 - bx0 * l2 + a3 * l3

        w1 = l1 + 0.5 * hh * k11
        w2 = l2 + 0.5 * hh * k12
        w3 = l3 + 0.5 * hh * k13
        k21 = -2.0 * em1 + a * w1 + bzm * w2
        k22 = -2.0 * em2 - bzm * w1 + a * w2 + bxm * w3
        k23 = -2.0 * em3 - bxm * w2 + a3 * w3

        w1 = l1 + 0.5 * hh * k21
        w2 = l2 + 0.5 * hh * k22
        w3 = l3 + 0.5 * hh * k23
        k31 = -2.0 * em1 + a * w1 + bzm * w2
        k32 = -2.0 * em2 - bzm * w1 + a * w2 + bxm * w3
        k33 = -2.0 * em3 - bxm * w2 + a3 * w3

        w1 = l1 + hh * k31
        w2 = l2 + hh * k32
        w3 = l3 + hh * k33
        k41 = -2.0 * e11 + a * w1 + bz1 * w2
        k42 = -2.0 * e12 - bz1 * w1 + a * w2 + bx1 * w3
        k43 = -2.0 * e13 - bx1 * w2 + a3 * w3

        l1 = l1 + (hh / 6.0) * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        l2 = l2 + (hh / 6.0) * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        l3 = l3 + (hh / 6.0) * (k13 + 2.0 * k23 + 2.0 * k33 + k43)
        if not (math.isfinite(l1) and math.isfinite(l2) and math.isfinite(l3)):
            return out, n - k
        out[k - 1, 0] = l1
        out[k - 1, 1] = l2
        out[k - 1, 2] = l3
    return out, -1


def _trapezoid_cost(states, targets, controls, theta, h):
    """Trapezoidal quadrature of ||x - x_ref||^2 + theta * |u|^2 over the grid."""
    n = states.shape[0] - 1
    total = 0.0
    prev = 0.0
    for k in range(n + 1):
        e1 = states[k, 0] - targets[k, 0]
        e2 = states[k, 1] - targets[k, 1]
        e3 = states[k, 2] - targets[k, 2]
        f = (
            e1 * e1
            + e2 * e2
            + e3 * e3
            + theta * (controls[k, 0] * controls[k, 0] + controls[k, 1] * controls[k, 1])
        )
        if k > 0:
            total += 0.5 * h * (prev + f)
        prev = f
    return total


def _resolve_backend() -> str:
    requested = os.environ.get(BACKEND_ENV_VAR, "auto").lower()
    if requested not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{BACKEND_ENV_VAR} must be 'auto', 'numba', or 'numpy', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    from numba import njit

    rk4_bloch_forward = njit(cache=True)(_rk4_bloch_forward)
    rk4_costate_backward = njit(cache=True)(_rk4_costate_backward)
    trapezoid_cost = njit(cache=True)(_trapezoid_cost)
else:
    rk4_bloch_forward = _rk4_bloch_forward
    rk4_costate_backward = _rk4_costate_backward
    trapezoid_cost = _trapezoid_cost
