"""Fixed-step classical RK4 propagation on a shared time grid.

Two layers live here:

* generic sweeps (`integrate_forward`, `integrate_backward`) that take any
  ``field(t, y) -> dy`` callable -- slow but flexible, used for oracle
  cross-checks and arbitrary test fields;
* specialized sweeps (`forward_bloch`, `backward_costate`) that run the
  compiled kernels from `_kernels` for the two ODEs the solver actually
  iterates.  Both layers use the same stepping rule and the same linear
  interpolation of node samples at half-step times, and agree to roundoff.

Grids are uniform; integrating forward then backward over the same linear
field returns to the start to integrator accuracy (no interpolation is ever
applied to the propagated variable itself).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import _kernels
from .core import SystemParams, TimeGrid, Trajectory

__all__ = [
    "IntegrationDivergedError",
    "VectorField",
    "integrate_forward",
    "integrate_backward",
    "sampled",
    "bloch_field",
    "costate_field",
    "forward_bloch",
    "backward_costate",
]

# Any (t, y) -> dy/dt mapping over 3-vectors.
VectorField = Callable[[float, np.ndarray], np.ndarray]


class IntegrationDivergedError(RuntimeError):
    """Raised when an RK4 sweep produces a non-finite value."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"integration diverged at step {step}")


def integrate_forward(field: VectorField, y0, grid: TimeGrid) -> Trajectory:
    """March `field` from node 0 to node `steps` with classical RK4.

    Sample 0 is `y0` itself, untouched.  Deterministic: identical inputs
    give bit-identical trajectories.
    """
    y = np.array(y0, dtype=float)
    out = np.empty((grid.n_nodes, y.size))
    out[0] = y
    h = grid.h
    for k in range(grid.steps):
        t = grid.t0 + k * h
        k1 = field(t, y)
        k2 = field(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = field(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = field(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergedError(k)
        out[k + 1] = y
    return Trajectory(grid, out)


def integrate_backward(field: VectorField, y_final, grid: TimeGrid) -> Trajectory:
    """March `field` from node `steps` down to node 0 (negated RK4 step).

    The final sample is `y_final` itself, untouched.
    """
    y = np.array(y_final, dtype=float)
    out = np.empty((grid.n_nodes, y.size))
    out[grid.steps] = y
    h = grid.h
    hh = -h
    for k in range(grid.steps, 0, -1):
        t = grid.t0 + k * h
        k1 = field(t, y)
        k2 = field(t + 0.5 * hh, y + 0.5 * hh * k1)
        k3 = field(t + 0.5 * hh, y + 0.5 * hh * k2)
        k4 = field(t + hh, y + hh * k3)
        y = y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergedError(grid.steps - k)
        out[k - 1] = y
    return Trajectory(grid, out)


def sampled(samples: np.ndarray, grid: TimeGrid) -> Callable[[float], np.ndarray]:
    """Linear interpolant of node samples; exact at nodes, linear between."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != grid.n_nodes:
        raise ValueError("sample count does not match grid")
    h = grid.h
    last = grid.steps - 1

    def at(t: float) -> np.ndarray:
        s = (t - grid.t0) / h
        k = min(max(int(np.floor(s)), 0), last)
        w = s - k
        return (1.0 - w) * samples[k] + w * samples[k + 1]

    return at


def bloch_field(controls: np.ndarray, grid: TimeGrid, p: SystemParams) -> VectorField:
    """State-equation field under node-sampled controls (interpolated)."""
    u_at = sampled(controls, grid)

    def field(t: float, y: np.ndarray) -> np.ndarray:
        u = u_at(t)
        a = p.transverse_rate
        return np.array(
            [
                -a * y[0] + u[1] * y[1],
                -u[1] * y[0] - a * y[1] + u[0] * y[2],
                -u[0] * y[1] - p.longitudinal_rate * y[2] - p.gamma0,
            ]
        )

    return field


def costate_field(
    states: np.ndarray,
    targets: np.ndarray,
    controls: np.ndarray,
    grid: TimeGrid,
    p: SystemParams,
) -> VectorField:
    """Costate-equation field; state/target/control samples share the grid."""
    x_at = sampled(states, grid)
    ref_at = sampled(targets, grid)
    u_at = sampled(controls, grid)

    def field(t: float, lam: np.ndarray) -> np.ndarray:
        e = x_at(t) - ref_at(t)
        u = u_at(t)
        a = p.transverse_rate
        return np.array(
            [
                -2.0 * e[0] + a * lam[0] + u[1] * lam[1],
                -2.0 * e[1] - u[1] * lam[0] + a * lam[1] + u[0] * lam[2],
                -2.0 * e[2] - u[0] * lam[1] + p.longitudinal_rate * lam[2],
            ]
        )

    return field


def forward_bloch(x0, controls, grid: TimeGrid, p: SystemParams) -> Trajectory:
    """Kernel-backed forward sweep of the Bloch equation (fast path)."""
    controls = np.ascontiguousarray(controls, dtype=float)
    if controls.shape != (grid.n_nodes, 2):
        raise ValueError(f"controls must have shape ({grid.n_nodes}, 2)")
    x0 = np.ascontiguousarray(x0, dtype=float)
    states, bad = _kernels.rk4_bloch_forward(x0, controls, grid.h, p.gamma0, p.n_mean)
    if bad >= 0:
        raise IntegrationDivergedError(int(bad))
    return Trajectory(grid, states)


def backward_costate(
    lam_final, states, targets, controls, grid: TimeGrid, p: SystemParams
) -> Trajectory:
    """Kernel-backed backward sweep of the costate equation (fast path)."""
    states = np.ascontiguousarray(states, dtype=float)
    targets = np.ascontiguousarray(targets, dtype=float)
    controls = np.ascontiguousarray(controls, dtype=float)
    lam_final = np.ascontiguousarray(lam_final, dtype=float)
    costates, bad = _kernels.rk4_costate_backward(
        lam_final, states, targets, controls, grid.h, p.gamma0, p.n_mean
    )
    if bad >= 0:
        raise IntegrationDivergedError(int(bad))
    return Trajectory(grid, costates)
