import numpy as np


def smooth_random_controls(rng, grid, omega0=1.0, n_modes=4, amplitude=0.2):
    """Band-limited random pulse pair around the free-precession field.

    Gradient checks need control shapes the grid actually resolves;
    node-to-node white noise has no meaningful continuous-time gradient.
    """
    t = grid.nodes()
    bx = np.zeros_like(t)
    bz = np.full_like(t, omega0)
    for _ in range(n_modes):
        a1, a2 = amplitude * rng.standard_normal(2)
        f1, f2 = rng.uniform(0.1, 1.5, 2)
        ph1, ph2 = rng.uniform(0, 2 * np.pi, 2)
        bx += a1 * np.sin(f1 * t + ph1)
        bz += a2 * np.sin(f2 * t + ph2)
    return np.column_stack([bx, bz])
