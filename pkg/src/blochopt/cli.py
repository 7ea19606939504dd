"""Command-line interface: free evolution, tracking optimization, temperature
sweeps, and self-verification, all emitting deterministic CSV files.

Configuration comes from an optional JSON file (sections mirroring RunConfig;
every key optional, unknown keys rejected) plus per-field override flags.
Exit codes: 0 success, 1 configuration error, 2 solver or integration
failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import (
    SystemParams,
    TimeGrid,
    Trajectory,
    decoherence_factor,
    free_evolution,
    mean_occupation_to_temperature,
    populations,
    target_trajectory,
)
from .integrate import forward_bloch
from .optimizer import (
    CostWeights,
    OptimalSolution,
    SolverDivergedError,
    SweepSettings,
    adjoint_gradient_check,
    solve_tracking,
)

__all__ = ["RunConfig", "SweepSummaryRow", "ConfigError", "load_config", "main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3

SQRT_HALF = math.sqrt(2.0) / 2.0
DEFAULT_N_SWEEP = (0.01, 0.2, 0.5, 1.0, 2.0, 10.0)

# Verification thresholds (fixed, not configurable: they define the contract).
VERIFY_INTEGRATOR_TOL = 1e-8
VERIFY_ADJOINT_REL_TOL = 1e-4
VERIFY_STATIONARITY_TOL = 1e-3
VERIFY_MONOTONE_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    initial_state: np.ndarray
    grid: TimeGrid
    weights: CostWeights
    sweep: SweepSettings
    n_sweep_values: tuple
    output_path: Path


@dataclass(frozen=True)
class SweepSummaryRow:
    n_mean: float
    temperature_kelvin_per_omega0: float
    converged: bool
    iterations: int
    final_cost: float
    tracking_error_integral: float
    control_energy_integral: float
    terminal_pg: float
    terminal_pe: float
    mean_decoherence_controlled: float
    mean_decoherence_free: float


_SCHEMA = {
    "system": {"gamma0", "n_mean", "omega0"},
    "initial_state": None,
    "grid": {"t0", "tf", "steps"},
    "weights": {"theta"},
    "sweep": {
        "max_iterations",
        "cost_rel_tol",
        "control_abs_tol",
        "relaxation_init",
        "relaxation_backtrack",
    },
    "n_sweep_values": None,
    "output_path": None,
}


def _check_keys(data: dict) -> None:
    for key, value in data.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key: {key!r}")
        allowed = _SCHEMA[key]
        if allowed is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be an object")
            for sub in value:
                if sub not in allowed:
                    raise ConfigError(f"unknown config key: {key}.{sub!r}")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from defaults, an optional JSON file, and overrides.

    Type invariants are enforced here, so a bad value fails fast with a
    message naming the offending key.
    """
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file is not valid JSON: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        _check_keys(data)

    overrides = overrides or {}
    system_kw = dict(data.get("system", {}))
    grid_kw = dict(data.get("grid", {}))
    weights_kw = dict(data.get("weights", {}))
    sweep_kw = dict(data.get("sweep", {}))
    if overrides.get("n") is not None:
        system_kw["n_mean"] = overrides["n"]
    if overrides.get("gamma0") is not None:
        system_kw["gamma0"] = overrides["gamma0"]
    if overrides.get("tf") is not None:
        grid_kw["tf"] = overrides["tf"]
    if overrides.get("steps") is not None:
        grid_kw["steps"] = overrides["steps"]
    if overrides.get("theta") is not None:
        weights_kw["theta"] = overrides["theta"]

    def build(name, section, factory, defaults):
        merged = {**defaults, **section}
        try:
            return factory(**merged)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"invalid config value in {name!r}: {err}") from err

    system = build("system", system_kw, SystemParams, dict(gamma0=0.1, n_mean=0.01, omega0=1.0))
    grid = build("grid", grid_kw, TimeGrid, dict(t0=0.0, tf=30.0, steps=6000))
    weights = build("weights", weights_kw, CostWeights, dict(theta=0.1))
    sweep = build("sweep", sweep_kw, SweepSettings, {})

    initial = data.get("initial_state", [SQRT_HALF, SQRT_HALF, 1.0])
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (3,):
        raise ConfigError("initial_state must be a list of 3 numbers")
    if not np.all(np.isfinite(initial)):
        raise ConfigError("initial_state components must be finite")

    n_values = data.get("n_sweep_values", list(DEFAULT_N_SWEEP))
    if not isinstance(n_values, (list, tuple)) or not n_values:
        raise ConfigError("n_sweep_values must be a nonempty list")
    n_values = tuple(float(v) for v in n_values)
    if any(v < 0 for v in n_values):
        raise ConfigError("n_sweep_values entries must be nonnegative")

    out = overrides.get("out") or data.get("output_path", "out")
    return RunConfig(
        system=system,
        initial_state=initial,
        grid=grid,
        weights=weights,
        sweep=sweep,
        n_sweep_values=n_values,
        output_path=Path(out),
    )


def _warn_if_unphysical(x0: np.ndarray) -> None:
    norm = float(np.linalg.norm(x0))
    if norm > 1.0 + 1e-12:
        print(
            f"warning: initial state norm {norm:.6g} exceeds 1; "
            "evolving an unphysical Bloch vector",
            file=sys.stderr,
        )


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: list, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _trapz(values: np.ndarray, h: float) -> float:
    return float(np.trapezoid(values, dx=h))


def cmd_free(config: RunConfig) -> int:
    """Analytic free evolution at the configured N, one CSV row per node."""
    _warn_if_unphysical(config.initial_state)
    t = config.grid.nodes()
    states = free_evolution(config.initial_state, t, config.system)
    p_g, p_e = populations(states)
    lam = decoherence_factor(states)
    rows = zip(t, states[:, 0], states[:, 1], states[:, 2], p_g, p_e, lam)
    _write_csv(
        config.output_path / "free.csv",
        ["t", "x1", "x2", "x3", "p_g", "p_e", "Lambda"],
        rows,
    )
    return EXIT_OK


def _sweep_metrics(config: RunConfig, solution: OptimalSolution):
    grid = config.grid
    h = grid.h
    t = grid.nodes()
    states = solution.states.samples
    err = np.sum((states - solution.targets.samples) ** 2, axis=1)
    effort = np.sum(solution.controls.samples**2, axis=1)
    lam_ctrl = decoherence_factor(states)
    lam_free = decoherence_factor(free_evolution(config.initial_state, t, config.system))
    span = grid.tf - grid.t0
    p_g, p_e = populations(states[-1])
    return dict(
        final_cost=solution.final_cost,
        tracking_error_integral=_trapz(err, h),
        control_energy_integral=_trapz(effort, h),
        terminal_pg=p_g,
        terminal_pe=p_e,
        mean_decoherence_controlled=_trapz(lam_ctrl, h) / span,
        mean_decoherence_free=_trapz(lam_free, h) / span,
    )


def cmd_optimize(config: RunConfig) -> int:
    """Solve the tracking problem; write trajectory and control CSVs."""
    _warn_if_unphysical(config.initial_state)
    try:
        solution = solve_tracking(
            config.initial_state,
            config.system,
            config.weights,
            config.grid,
            config.sweep,
        )
    except SolverDivergedError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SOLVER

    t = config.grid.nodes()
    states = solution.states.samples
    p_g, p_e = populations(states)
    lam = decoherence_factor(states)
    free_states = free_evolution(config.initial_state, t, config.system)
    pg_free, pe_free = populations(free_states)
    pg_tgt, pe_tgt = populations(solution.targets.samples)
    _write_csv(
        config.output_path / "trajectory.csv",
        [
            "t",
            "x1",
            "x2",
            "x3",
            "p_g",
            "p_e",
            "Lambda",
            "pg_free",
            "pe_free",
            "pg_target",
            "pe_target",
        ],
        zip(
            t,
            states[:, 0],
            states[:, 1],
            states[:, 2],
            p_g,
            p_e,
            lam,
            pg_free,
            pe_free,
            pg_tgt,
            pe_tgt,
        ),
    )
    controls = solution.controls.samples
    _write_csv(
        config.output_path / "controls.csv",
        ["t", "Bx", "Bz"],
        zip(t, controls[:, 0], controls[:, 1]),
    )
    print(
        f"converged={_fmt(solution.converged)}"
        f" iterations={solution.iterations}"
        f" final_cost={_fmt(solution.final_cost)}"
        f" stationarity_residual={_fmt(solution.stationarity_residual)}"
    )
    return EXIT_OK


def run_sweep(config: RunConfig) -> list:
    """One tracking solve per N value, ascending; failures become rows."""
    rows = []
    for n in sorted(config.n_sweep_values):
        system = replace(config.system, n_mean=n)
        temperature = mean_occupation_to_temperature(n, system.omega0)
        cfg_n = replace(config, system=system)
        try:
            solution = solve_tracking(
                config.initial_state, system, config.weights, config.grid, config.sweep
            )
        except SolverDivergedError as err:
            rows.append(
                SweepSummaryRow(
                    n_mean=n,
                    temperature_kelvin_per_omega0=temperature,
                    converged=False,
                    iterations=err.iteration,
                    final_cost=math.nan,
                    tracking_error_integral=math.nan,
                    control_energy_integral=math.nan,
                    terminal_pg=math.nan,
                    terminal_pe=math.nan,
                    mean_decoherence_controlled=math.nan,
                    mean_decoherence_free=math.nan,
                )
            )
            continue
        metrics = _sweep_metrics(cfg_n, solution)
        rows.append(
            SweepSummaryRow(
                n_mean=n,
                temperature_kelvin_per_omega0=temperature,
                converged=solution.converged,
                iterations=solution.iterations,
                **metrics,
            )
        )
    return rows


def cmd_sweep(config: RunConfig) -> int:
    """Summary CSV across the configured N values."""
    _warn_if_unphysical(config.initial_state)
    rows = run_sweep(config)
    header = [
        "n_mean",
        "temperature_kelvin_per_omega0",
        "converged",
        "iterations",
        "final_cost",
        "tracking_error_integral",
        "control_energy_integral",
        "terminal_pg",
        "terminal_pe",
        "mean_decoherence_controlled",
        "mean_decoherence_free",
    ]
    _write_csv(
        config.output_path / "sweep.csv",
        header,
        (
            [
                r.n_mean,
                r.temperature_kelvin_per_omega0,
                r.converged,
                r.iterations,
                r.final_cost,
                r.tracking_error_integral,
                r.control_energy_integral,
                r.terminal_pg,
                r.terminal_pe,
                r.mean_decoherence_controlled,
                r.mean_decoherence_free,
            ]
            for r in rows
        ),
    )
    return EXIT_OK


def run_verification(config: RunConfig) -> list:
    """Oracle checks over the configured problem; returns (name, ok, detail)."""
    results = []
    grid = config.grid
    system = config.system

    # Integrator vs closed form: free precession controls, analytic solution.
    u = np.zeros((grid.n_nodes, 2))
    u[:, 1] = system.omega0
    numeric = forward_bloch(config.initial_state, u, grid, system).samples
    exact = free_evolution(config.initial_state, grid.nodes(), system)
    err = float(np.max(np.abs(numeric - exact)))
    results.append(
        ("integrator_vs_closed_form", err < VERIFY_INTEGRATOR_TOL, f"max_err={err:.3e}")
    )

    # Adjoint gradient vs central finite difference at fixed interior nodes.
    # Band-limited random pulses: the check compares against the continuous
    # adjoint formula, which only describes grid-resolved control shapes.
    rng = np.random.default_rng(20817)
    t = grid.nodes()
    bx = np.zeros_like(t)
    bz = np.full_like(t, system.omega0)
    for _ in range(4):
        amps = 0.2 * rng.standard_normal(2)
        freqs = rng.uniform(0.1, 1.5, 2)
        phases = rng.uniform(0, 2 * np.pi, 2)
        bx += amps[0] * np.sin(freqs[0] * t + phases[0])
        bz += amps[1] * np.sin(freqs[1] * t + phases[1])
    controls = np.column_stack([bx, bz])
    worst = 0.0
    for node in sorted(rng.choice(np.arange(1, grid.steps), size=4, replace=False)):
        adj, fd = adjoint_gradient_check(
            config.initial_state,
            system,
            config.weights,
            grid,
            controls,
            int(node),
            "bx" if node % 2 else "bz",
            step=1e-6,
        )
        worst = max(worst, abs(adj - fd) / max(abs(fd), 1e-8))
    results.append(
        ("adjoint_vs_finite_difference", worst < VERIFY_ADJOINT_REL_TOL, f"max_rel_err={worst:.3e}")
    )

    # Full solve: stationarity at convergence and monotone accepted costs.
    try:
        solution = solve_tracking(
            config.initial_state, system, config.weights, grid, config.sweep
        )
    except SolverDivergedError as err:
        results.append(("stationarity_at_convergence", False, str(err)))
        results.append(("monotone_cost", False, str(err)))
        return results
    resid = solution.stationarity_residual
    results.append(
        (
            "stationarity_at_convergence",
            solution.converged and resid < VERIFY_STATIONARITY_TOL,
            f"converged={solution.converged} residual={resid:.3e}",
        )
    )
    drops = np.diff(solution.cost_history)
    worst_rise = float(drops.max()) if drops.size else 0.0
    results.append(
        ("monotone_cost", worst_rise <= VERIFY_MONOTONE_TOL, f"max_rise={worst_rise:.3e}")
    )
    return results


def cmd_verify(config: RunConfig) -> int:
    _warn_if_unphysical(config.initial_state)
    results = run_verification(config)
    all_ok = True
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} ({detail})")
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blochopt",
        description="Dissipative two-level population transfer: simulation and optimal tracking control.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--n", type=float, help="mean thermal occupation N")
    common.add_argument("--theta", type=float, help="control-effort weight")
    common.add_argument("--gamma0", type=float, help="spontaneous emission rate")
    common.add_argument("--tf", type=float, help="horizon end time")
    common.add_argument("--steps", type=int, help="number of grid intervals")
    common.add_argument("--out", help="output directory for CSV files")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("free", parents=[common], help="analytic free evolution -> free.csv")
    sub.add_parser(
        "optimize", parents=[common], help="tracking solve -> trajectory.csv, controls.csv"
    )
    sub.add_parser("sweep", parents=[common], help="solve across N values -> sweep.csv")
    sub.add_parser("verify", parents=[common], help="run built-in oracle checks")
    return parser


_COMMANDS = {
    "free": cmd_free,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = dict(
        n=args.n, theta=args.theta, gamma0=args.gamma0, tf=args.tf, steps=args.steps, out=args.out
    )
    try:
        config = load_config(args.config, overrides)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](config)
    except OSError as err:
        print(f"output error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
