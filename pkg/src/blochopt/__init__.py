"""Population-transfer control for a dissipative two-level system.

Simulates the Bloch-vector master equation of a thermally damped qubit,
solves the quadratic tracking problem for the two control fields (bx, bz)
by a forward-backward sweep, and reproduces the free-evolution physics
(stationary states, populations, decoherence envelopes) in closed form.
"""

from .core import (
    BlochState,
    ControlInput,
    SystemParams,
    TimeGrid,
    Trajectory,
    bloch_rhs,
    decoherence_factor,
    drift_matrix,
    eigen_basis,
    free_evolution,
    mean_occupation_to_temperature,
    populations,
    stationary_state,
    target_trajectory,
)
from .integrate import (
    IntegrationDivergedError,
    backward_costate,
    bloch_field,
    costate_field,
    forward_bloch,
    integrate_backward,
    integrate_forward,
)
from .optimizer import (
    CostWeights,
    OptimalSolution,
    SolverDivergedError,
    SweepSettings,
    adjoint_gradient_check,
    control_from_costate,
    costate_rhs,
    evaluate_cost,
    solve_tracking,
    stationarity_residual,
)

__version__ = "0.1.0"

__all__ = [
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
    "IntegrationDivergedError",
    "integrate_forward",
    "integrate_backward",
    "bloch_field",
    "costate_field",
    "forward_bloch",
    "backward_costate",
    "CostWeights",
    "SweepSettings",
    "OptimalSolution",
    "SolverDivergedError",
    "costate_rhs",
    "control_from_costate",
    "evaluate_cost",
    "solve_tracking",
    "stationarity_residual",
    "adjoint_gradient_check",
]
