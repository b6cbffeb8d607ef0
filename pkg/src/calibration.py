#!/usr/bin/env python3
"""
Payoff Calibration
Encodes option payoffs as normalised target states and fits the initial
ansatz parameters, escalating the circuit depth until the fit is good enough
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.optimize import differential_evolution, least_squares

from ansatz import AnsatzCircuit, build_ansatz, derivative_states, prepare_state, prepare_states_batch
from errors import ConfigurationError, UsageError
from hamiltonian import SpaceGrid, TransformConstants
from oracle import write_csv_with_header
from statevector import StateVector

NOT_CONVERGED_MESSAGE = "a different ansatz is needed"


@dataclass
class TargetState:
    """
    Normalised payoff encoding |psi(0)>

    Args:
        vector: Real unit-norm amplitudes
        provenance: Contract and transform metadata
        norm: Norm of the raw encoded payoff (1 / gamma(0))
    """

    vector: StateVector
    provenance: Dict = field(default_factory=dict)
    norm: float = 1.0

    @property
    def dimension(self) -> int:
        return self.vector.shape[0]


def _normalise(raw: np.ndarray, provenance: Dict) -> TargetState:
    nrm = float(np.linalg.norm(raw))
    if not np.all(np.isfinite(raw)) or nrm == 0.0:
        raise ConfigurationError(f"Payoff vanishes on the whole grid: {provenance}")
    return TargetState(vector=raw / nrm, provenance=provenance, norm=nrm)


def payoff_state_european(grid: SpaceGrid, K: float, consts: TransformConstants) -> TargetState:
    """
    e^{-a x_i} max(e^{x_i} - K, 0), normalised

    Args:
        grid: Log-price grid
        K: Strike
        consts: Change-of-variable constants (a)

    Returns:
        TargetState on the log-price grid
    """
    x = grid.values
    raw = np.exp(-consts.a * x) * np.maximum(np.exp(x) - K, 0.0)
    return _normalise(raw, {'contract': 'european', 'K': K, 'a': consts.a,
                            'x_min': grid.v_min, 'x_max': grid.v_max})


def payoff_state_asian(grid: SpaceGrid) -> TargetState:
    """Terminal condition Q(0, y) = max(y, 0), normalised"""
    raw = np.maximum(grid.values, 0.0)
    return _normalise(raw, {'contract': 'asian', 'y_min': grid.v_min, 'y_max': grid.v_max})


class FitConfig(BaseModel):
    """Differential-evolution and polish settings"""

    strategy: str = "rand1bin"
    mutation: float = Field(0.8, gt=0, le=2)
    recombination: float = Field(0.9, ge=0, le=1)
    popsize: int = Field(15, ge=1)
    maxiter: int = Field(2000, ge=1)
    tol: float = Field(1e-8, ge=0)
    lower: float = -np.pi
    upper: float = 3.0 * np.pi
    seed: int = 0
    polish: bool = True
    polish_max_nfev: int = Field(2000, ge=1)


@dataclass
class FitResult:
    """Best initial parameters found for one circuit depth"""

    theta0: np.ndarray
    residual: float
    n_cells: int
    converged: bool
    generations: int = 0
    evaluations: int = 0
    message: str = ""
    history: List[Tuple[int, float]] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return len(self.theta0)

    def summary(self) -> Dict:
        return {
            'residual': self.residual,
            'n_cells': self.n_cells,
            'n_params': self.n_params,
            'converged': self.converged,
            'generations': self.generations,
            'evaluations': self.evaluations,
        }


def state_distance(c: AnsatzCircuit, theta: Sequence[float], target: TargetState) -> float:
    """|| |phi(theta)> - |psi(0)> ||"""
    return float(np.linalg.norm(prepare_state(c, theta) - target.vector))


def warm_start(previous: Sequence[float], circuit: AnsatzCircuit) -> np.ndarray:
    """
    Pad a shallower optimum with zeros for a deeper layered ansatz

    build_ansatz appends cells, so the first parameters keep their gates and
    every added Ry / controlled-Ry at angle 0 is the identity.
    """
    previous = np.asarray(previous, dtype=float)
    if previous.shape[0] > circuit.n_params:
        raise UsageError(f"Cannot pad {previous.shape[0]} parameters into {circuit.n_params}")
    return np.concatenate([previous, np.zeros(circuit.n_params - previous.shape[0])])


def fit_theta0(c: AnsatzCircuit, target: TargetState, cfg: Optional[FitConfig] = None,
               eps_max: Optional[float] = None, x0: Optional[Sequence[float]] = None) -> FitResult:
    """
    theta0 = argmin || |phi(theta)> - |psi(0)> ||

    Differential evolution over the box [lower, upper]^N, then a trust-region
    least-squares polish with the analytic Jacobian from derivative_states. The
    better of the two (and of x0, when given) is returned.

    Args:
        c: Ansatz circuit
        target: Normalised payoff state
        cfg: Optimiser settings
        eps_max: Residual tolerance for the converged flag (DE success when None)
        x0: Optional warm start, included in the initial population

    Returns:
        FitResult with the residual recomputed at theta0
    """
    cfg = cfg or FitConfig()
    if c.dimension != target.dimension:
        raise UsageError(f"Circuit dimension {c.dimension} does not match target {target.dimension}")
    goal = np.real(target.vector)
    bounds = [(cfg.lower, cfg.upper)] * c.n_params

    def population_residuals(x: np.ndarray) -> np.ndarray:
        # vectorised DE passes parameters column-wise: (N, S)
        states = prepare_states_batch(c, np.atleast_2d(x.T))
        return np.linalg.norm(states - goal, axis=1)

    candidates = []
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        candidates.append(x0)
        x0 = np.clip(x0, cfg.lower, cfg.upper)

    print(f"🔄 Differential evolution: {c.n_params} parameters, population {cfg.popsize * c.n_params}")
    de = differential_evolution(
        population_residuals,
        bounds,
        strategy=cfg.strategy,
        maxiter=cfg.maxiter,
        popsize=cfg.popsize,
        tol=cfg.tol,
        mutation=cfg.mutation,
        recombination=cfg.recombination,
        seed=cfg.seed,
        polish=False,
        init="latinhypercube",
        x0=x0,
        updating="deferred",
        vectorized=True,
    )
    print(f"   DE finished after {de.nit} generations: residual {de.fun:.6e}")
    candidates.append(np.asarray(de.x))
    evaluations = int(de.nfev)

    if cfg.polish:
        polished = least_squares(
            lambda th: np.real(prepare_state(c, th)) - goal,
            de.x,
            jac=lambda th: np.real(derivative_states(c, th)).T,
            method="trf",
            max_nfev=cfg.polish_max_nfev,
        )
        candidates.append(np.asarray(polished.x))
        evaluations += int(polished.nfev)
        print(f"   Polish: residual {np.sqrt(2.0 * polished.cost):.6e}")

    residuals = [state_distance(c, th, target) for th in candidates]
    best = int(np.argmin(residuals))
    residual = residuals[best]
    converged = residual <= eps_max if eps_max is not None else bool(de.success)

    status = "✅" if converged else "⚠️ "
    print(f"{status} Fit residual {residual:.6e} with {c.n_cells} cell(s)")
    return FitResult(
        theta0=np.asarray(candidates[best], dtype=float),
        residual=residual,
        n_cells=c.n_cells,
        converged=converged,
        generations=int(de.nit),
        evaluations=evaluations,
        message="" if converged else str(de.message),
    )


def ansatz_depth_search(target: TargetState, eps_max: float, n_cells_max: int, n_cells_start: int = 1,
                        cfg: Optional[FitConfig] = None) -> Tuple[Optional[AnsatzCircuit], FitResult]:
    """
    Fit, and add a unit cell while the residual exceeds eps_max

    Each escalated fit is warm-started from the padded previous optimum, so the
    best residual never increases with depth.

    Args:
        target: Normalised payoff state
        eps_max: Accepted residual
        n_cells_max: Largest depth to try
        n_cells_start: First depth to try
        cfg: Optimiser settings

    Returns:
        (circuit, FitResult); on failure converged is False and the result
        carries the best attempt (circuit None when nothing was tried)
    """
    if eps_max <= 0:
        raise ConfigurationError(f"eps_max must be positive, got {eps_max}")
    if n_cells_max < 1:
        raise ConfigurationError(f"n_cells_max must be at least 1, got {n_cells_max}")

    n_qubits = target.dimension.bit_length() - 1
    if n_cells_start > n_cells_max:
        print(f"❌ Start depth {n_cells_start} exceeds the limit {n_cells_max}: {NOT_CONVERGED_MESSAGE}")
        return None, FitResult(theta0=np.zeros(0), residual=float("inf"), n_cells=n_cells_start,
                               converged=False, message=NOT_CONVERGED_MESSAGE)

    history: List[Tuple[int, float]] = []
    best_circuit, best = None, None
    for n_cells in range(n_cells_start, n_cells_max + 1):
        circuit = build_ansatz(n_qubits, n_cells)
        x0 = warm_start(best.theta0, circuit) if best is not None else None
        result = fit_theta0(circuit, target, cfg, eps_max=eps_max, x0=x0)
        history.append((n_cells, result.residual))
        if best is None or result.residual <= best.residual:
            best_circuit, best = circuit, result
        if result.converged:
            break
        print(f"⚠️  Residual {result.residual:.4e} > {eps_max}; adding a unit cell")

    best.history = history
    if not best.converged:
        best.message = NOT_CONVERGED_MESSAGE
        print(f"❌ No depth up to {n_cells_max} cells reached {eps_max}: {NOT_CONVERGED_MESSAGE}")
    return best_circuit, best


def save_fit_result(result: FitResult, path: str, header: Optional[Dict] = None):
    """param,theta rows under a '#' header with the fit summary"""
    meta = dict(header or {})
    meta.update({f"fit_{k}": v for k, v in result.summary().items()})
    df = pd.DataFrame({'param': np.arange(1, result.n_params + 1), 'theta': result.theta0})
    write_csv_with_header(df, path, meta, float_format="%.17g")


def load_theta(path: str, column: str = "theta") -> np.ndarray:
    """
    Read a parameter column from a '#'-commented CSV

    Args:
        path: File written by save_fit_result, or a multi-column table
        column: Column to read

    Returns:
        Parameter vector
    """
    df = pd.read_csv(path, comment="#", float_precision="round_trip")
    if column not in df.columns:
        raise UsageError(f"Column {column!r} not found in {path} (have {list(df.columns)})")
    return df[column].to_numpy(dtype=float)


if __name__ == '__main__':
    grid = SpaceGrid.european(50.0, 150.0, 4)
    consts = TransformConstants(sigma=0.2, r=0.0, T=1.0)
    target = payoff_state_european(grid, 100.0, consts)
    print("📊 Target:", np.round(target.vector, 4))
    circuit, fit = ansatz_depth_search(target, eps_max=0.05, n_cells_max=3, cfg=FitConfig(maxiter=300))
    print("📊 Fit:", fit.summary())
