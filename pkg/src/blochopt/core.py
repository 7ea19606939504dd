"""Physics core: Bloch-vector dynamics of a driven, dissipative two-level system.

The state is the real 3-vector x = (x1, x2, x3) built from the density-matrix
coherences (x1, x2) and the population difference (x3).  Under two control
fields u = (bx, bz) and thermal damping the state obeys the linear affine ODE

    dx1/dt = -(2N+1)/2 * g0 * x1 + bz * x2
    dx2/dt = -bz * x1 - (2N+1)/2 * g0 * x2 + bx * x3
    dx3/dt = -bx * x2 - (2N+1) * g0 * x3 - g0

with g0 the spontaneous-emission rate and N the mean thermal occupation of
the reservoir mode.  Everything here is a pure function; closed-form results
(free evolution, stationary state, decoherence envelope) serve as the exact
oracles that the numerical integrator and solver are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BOLTZMANN_CONSTANT",
    "REDUCED_PLANCK",
    "BlochState",
    "ControlInput",
    "SystemParams",
    "TimeGrid",
    "Trajectory",
    "bloch_rhs",
    "drift_matrix",
    "free_evolution",
    "stationary_state",
    "populations",
    "decoherence_factor",
    "target_trajectory",
    "eigen_basis",
    "mean_occupation_to_temperature",
]

# Fixed constants (J/K, J*s); kept at these exact values so the reported
# temperature scale is reproducible bit-for-bit.
BOLTZMANN_CONSTANT = 1.380662e-23
REDUCED_PLANCK = 1.0545887e-34


@dataclass(frozen=True)
class BlochState:
    """A Bloch vector (x1, x2, x3).

    Physical states satisfy |x| <= 1, but the type deliberately admits any
    finite vector: the dynamics are well defined regardless, and some useful
    benchmark initial conditions are unphysical.  Use :attr:`is_physical`
    to test, and convert with ``np.asarray(state)`` wherever arrays are
    expected.
    """

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"BlochState.{name} must be finite")

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x1, self.x2, self.x3], dtype=dtype or float)

    @classmethod
    def from_array(cls, arr) -> "BlochState":
        a = np.asarray(arr, dtype=float)
        if a.shape != (3,):
            raise ValueError(f"expected shape (3,), got {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]))

    @property
    def norm(self) -> float:
        return math.sqrt(self.x1**2 + self.x2**2 + self.x3**2)

    @property
    def is_physical(self) -> bool:
        """True when the vector lies inside the Bloch ball (|x| <= 1 + 1e-12)."""
        return self.norm <= 1.0 + 1e-12


@dataclass(frozen=True)
class ControlInput:
    """Instantaneous control pair (bx, bz), in units of the system frequency."""

    bx: float
    bz: float

    def __post_init__(self):
        if not (math.isfinite(self.bx) and math.isfinite(self.bz)):
            raise ValueError("controls must be finite")

    def __array__(self, dtype=None, copy=None):
        return np.array([self.bx, self.bz], dtype=dtype or float)


@dataclass(frozen=True)
class SystemParams:
    """Dissipation and temperature parameters.

    gamma0  spontaneous emission rate (> 0), in units of omega0
    n_mean  mean thermal occupation N of the reservoir mode (>= 0)
    omega0  system frequency, the norm unit (default 1.0)
    """

    gamma0: float
    n_mean: float
    omega0: float = 1.0

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if self.n_mean < 0:
            raise ValueError(f"n_mean must be nonnegative, got {self.n_mean}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")

    @property
    def transverse_rate(self) -> float:
        """Coherence decay rate (2N+1)*gamma0/2."""
        return 0.5 * (2.0 * self.n_mean + 1.0) * self.gamma0

    @property
    def longitudinal_rate(self) -> float:
        """Population decay rate (2N+1)*gamma0."""
        return (2.0 * self.n_mean + 1.0) * self.gamma0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of `steps` intervals on [t0, tf]; node k is t0 + k*h."""

    t0: float
    tf: float
    steps: int

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError(f"tf must exceed t0, got [{self.t0}, {self.tf}]")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.steps

    @property
    def n_nodes(self) -> int:
        return self.steps + 1

    def nodes(self) -> np.ndarray:
        return self.t0 + np.arange(self.steps + 1) * self.h

    def midpoints(self) -> np.ndarray:
        return self.t0 + (np.arange(self.steps) + 0.5) * self.h


@dataclass(frozen=True)
class Trajectory:
    """Samples on a TimeGrid: shape (steps+1, k) for k-vector samples."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape[0] != self.grid.n_nodes:
            raise ValueError(
                f"expected {self.grid.n_nodes} samples, got {samples.shape[0]}"
            )
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]


def bloch_rhs(x, u, p: SystemParams) -> np.ndarray:
    """Time derivative of the Bloch vector under controls u = (bx, bz).

    Accepts any array-likes of shape (3,) and (2,); returns shape (3,).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    a = p.transverse_rate
    bx, bz = u[0], u[1]
    return np.array(
        [
            -a * x[0] + bz * x[1],
            -bz * x[0] - a * x[1] + bx * x[2],
            -bx * x[1] - p.longitudinal_rate * x[2] - p.gamma0,
        ]
    )


def drift_matrix(u, p: SystemParams) -> np.ndarray:
    """The 3x3 matrix A(u) with bloch_rhs(x, u, p) = A @ x + (0, 0, -gamma0)."""
    u = np.asarray(u, dtype=float)
    a = p.transverse_rate
    return np.array(
        [
            [-a, u[1], 0.0],
            [-u[1], -a, u[0]],
            [0.0, -u[0], -p.longitudinal_rate],
        ]
    )


def free_evolution(x0, t, p: SystemParams) -> np.ndarray:
    """Closed-form solution for bx = 0, bz = omega0.

    The transverse pair rotates at omega0 while decaying at (2N+1)*gamma0/2;
    x3 relaxes exponentially toward -1/(2N+1) at rate (2N+1)*gamma0.
    `t` may be a scalar (returns shape (3,)) or an array (returns (len(t), 3)).
    """
    x0 = np.asarray(x0, dtype=float)
    t = np.asarray(t, dtype=float)
    decay = np.exp(-p.transverse_rate * t)
    s = np.sin(p.omega0 * t)
    c = np.cos(p.omega0 * t)
    x3_inf = 1.0 / (2.0 * p.n_mean + 1.0)
    x1 = decay * (x0[1] * s + x0[0] * c)
    x2 = decay * (x0[1] * c - x0[0] * s)
    x3 = np.exp(-p.longitudinal_rate * t) * (x3_inf + x0[2]) - x3_inf
    return np.stack([x1, x2, x3], axis=-1)


def stationary_state(p: SystemParams) -> np.ndarray:
    """Fixed point (0, 0, -1/(2N+1)) of the uncontrolled dynamics."""
    return np.array([0.0, 0.0, -1.0 / (2.0 * p.n_mean + 1.0)])


def populations(x) -> tuple:
    """Ground and excited occupation probabilities (p_g, p_e) from x3.

    p_g = (1 + x3)/2; the excited population is returned as 1 - p_g so the
    pair sums to one exactly in floating point.  Works on a single state
    (scalar pair) or a trajectory array of shape (..., 3).
    """
    x = np.asarray(x, dtype=float)
    p_g = 0.5 * (1.0 + x[..., 2])
    p_e = 1.0 - p_g
    if p_g.ndim == 0:
        return float(p_g), float(p_e)
    return p_g, p_e


def decoherence_factor(x) -> np.ndarray | float:
    """Surviving coherence: half the transverse norm, sqrt(x1^2 + x2^2)/2."""
    x = np.asarray(x, dtype=float)
    lam = 0.5 * np.sqrt(x[..., 0] ** 2 + x[..., 1] ** 2)
    return float(lam) if lam.ndim == 0 else lam


def target_trajectory(x0, t, gamma0: float, omega_ref: float = 1.0) -> np.ndarray:
    """Reference trajectory to track: the zero-temperature free decay.

    Identical to free_evolution with n_mean = 0, but parameterized by an
    explicit rotation frequency `omega_ref` so the reference never depends on
    the controls being optimized.  Vectorized over `t` like free_evolution.
    """
    x0 = np.asarray(x0, dtype=float)
    t = np.asarray(t, dtype=float)
    decay = np.exp(-0.5 * gamma0 * t)
    s = np.sin(omega_ref * t)
    c = np.cos(omega_ref * t)
    x1 = decay * (x0[1] * s + x0[0] * c)
    x2 = decay * (x0[1] * c - x0[0] * s)
    x3 = np.exp(-gamma0 * t) * (x0[2] + 1.0) - 1.0
    return np.stack([x1, x2, x3], axis=-1)


def eigen_basis(u) -> tuple:
    """Energy splitting, mixing angle, and instantaneous eigenstates of the
    control Hamiltonian (bz*sz + bx*sx)/2.

    Returns (delta_e, eta, plus, minus) with delta_e = sqrt(bx^2 + bz^2),
    eta = atan2(bx, bz), plus = (cos(eta/2), sin(eta/2)) and
    minus = (-sin(eta/2), cos(eta/2)) as coefficient pairs in the bare basis.

    Raises ValueError for the zero field, where the eigenbasis is undefined.
    """
    u = np.asarray(u, dtype=float)
    bx, bz = float(u[0]), float(u[1])
    if bx == 0.0 and bz == 0.0:
        raise ValueError("degenerate Hamiltonian: (bx, bz) = (0, 0)")
    delta_e = math.hypot(bx, bz)
    eta = math.atan2(bx, bz)
    half = 0.5 * eta
    plus = np.array([math.cos(half), math.sin(half)])
    minus = np.array([-math.sin(half), math.cos(half)])
    return delta_e, eta, plus, minus


def mean_occupation_to_temperature(n_mean: float, omega0: float = 1.0) -> float:
    """Reservoir temperature (kelvin) for a Bose occupation N at frequency omega0.

    Inverts N = 1/(exp(hbar*omega0/(kB*T)) - 1), i.e.
    T = hbar*omega0 / (kB * ln(1 + 1/N)).  N = 0 maps to 0 K (the limit).
    """
    if n_mean < 0:
        raise ValueError(f"n_mean must be nonnegative, got {n_mean}")
    if n_mean == 0:
        return 0.0
    return REDUCED_PLANCK * omega0 / (BOLTZMANN_CONSTANT * math.log1p(1.0 / n_mean))
