#!/usr/bin/env python3
"""
Pricing Command Line
fit / price / replay front-end: resolves a run configuration, executes
calibration, evolution and the classical oracles, and writes CSV results

Exit codes: 0 success, 1 usage or configuration error, 2 calibration did not
converge, 3 divergence or numerical failure
"""

import argparse
import os
import sys
import time
from typing import Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from ansatz import AnsatzCircuit, build_ansatz, prepare_state
from audit import RunAuditLogger
from calibration import (
    FitConfig,
    TargetState,
    ansatz_depth_search,
    fit_theta0,
    load_theta,
    payoff_state_asian,
    payoff_state_european,
    save_fit_result,
)
from errors import ConfigurationError, DivergenceError, NumericalError, UsageError
from hamiltonian import HamiltonianSpec, SpaceGrid, TransformConstants, asian_hamiltonian, european_hamiltonian
from oracle import (
    black_scholes_call,
    exact_imaginary_evolution_td,
    rescale_to_price_asian,
    rescale_to_price_european,
    write_csv_with_header,
)
from varqite import EvolutionConfig, EvolutionTrace, evolve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_DIVERGED = 3


class RunConfig(BaseModel):
    """Resolved parameters of one pricing run; defaults reproduce the reference experiments"""

    contract: Literal["european", "asian"] = "european"
    S0: float = Field(100.0, gt=0)
    K: float = Field(100.0, gt=0)
    sigma: float = Field(0.2, gt=0)
    r: float = 0.0
    T: float = Field(1.0, gt=0)
    n_qubits: int = Field(4, ge=2, le=6)
    n_cells: int = Field(3, ge=1)
    depth_search: bool = False
    n_steps: int = Field(500, ge=1)
    cutoff_ratio: float = Field(1e-8, gt=0, lt=1)
    regularization: float = Field(0.0, ge=0, lt=1)
    mode: Literal["exact", "shots"] = "exact"
    shots: int = Field(0, ge=0)
    seed: int = 0
    s_min: float = Field(50.0, gt=0)
    s_max: float = Field(150.0, gt=0)
    y_min: float = -0.5
    y_max: float = 0.4
    eps_max: float = Field(0.05, gt=0)
    maxiter: int = Field(2000, ge=1)
    hamiltonian_path: Literal["dense", "pauli"] = "dense"
    interpolation: Literal["linear", "cubic"] = "linear"
    log_every: int = Field(50, ge=0)
    output_dir: str = Field(default_factory=lambda: os.getenv("QITE_OUTPUT_DIR", "results"))
    theta_file: Optional[str] = None

    def consts(self) -> TransformConstants:
        return TransformConstants(sigma=self.sigma, r=self.r, T=self.T)

    def grid(self) -> SpaceGrid:
        if self.contract == 'european':
            return SpaceGrid.european(self.s_min, self.s_max, self.n_qubits)
        return SpaceGrid.asian(self.y_min, self.y_max, self.n_qubits)

    def target(self) -> TargetState:
        if self.contract == 'european':
            return payoff_state_european(self.grid(), self.K, self.consts())
        return payoff_state_asian(self.grid())

    def hamiltonian(self) -> HamiltonianSpec:
        if self.contract == 'european':
            return european_hamiltonian(self.grid(), self.consts())
        return asian_hamiltonian(self.grid(), 0.0, self.consts())

    def fit_config(self) -> FitConfig:
        return FitConfig(seed=self.seed, maxiter=self.maxiter)

    def evolution_config(self) -> EvolutionConfig:
        return EvolutionConfig.for_horizon(
            self.consts().tau_max,
            n_steps=self.n_steps,
            cutoff_ratio=self.cutoff_ratio,
            regularization=self.regularization,
            mode=self.mode,
            shots=self.shots,
            rng_seed=self.seed,
            hamiltonian_path=self.hamiltonian_path,
            log_every=self.log_every,
        )

    def header(self, command: str) -> Dict:
        """Config echo for CSV headers; paths are left out so outputs compare across directories"""
        meta = self.model_dump(exclude={"output_dir", "theta_file"})
        meta['command'] = command
        return meta

    def output_path(self, kind: str) -> str:
        return os.path.join(self.output_dir, f"{kind}_{self.contract}.csv")


def _fit(cfg: RunConfig):
    target = cfg.target()
    if cfg.depth_search:
        return ansatz_depth_search(target, cfg.eps_max, n_cells_max=cfg.n_cells, cfg=cfg.fit_config())
    circuit = build_ansatz(cfg.n_qubits, cfg.n_cells)
    return circuit, fit_theta0(circuit, target, cfg.fit_config(), eps_max=cfg.eps_max)


def cmd_fit(cfg: RunConfig, audit: RunAuditLogger) -> int:
    """Calibrate theta0 and write fit_<contract>.csv"""
    run_id = audit.log_run_start("fit", cfg.header("fit"))
    print(f"\n[1/2] 🎯 Calibrating {cfg.contract} payoff ({cfg.n_qubits} qubits, up to {cfg.n_cells} cell(s))")
    start = time.time()
    circuit, fit = _fit(cfg)
    latency = (time.time() - start) * 1000
    audit.log_fit_result(run_id, fit.summary(), latency)

    print(f"\n[2/2] 💾 Writing results")
    if circuit is not None:
        path = cfg.output_path("fit")
        save_fit_result(fit, path, cfg.header("fit"))
        with open(os.path.join(cfg.output_dir, f"ansatz_{cfg.contract}.txt"), "w") as f:
            f.write(circuit.to_text(cfg.header("fit")))
        print(f"✓ {fit.n_params} parameters written to {path}")

    if not fit.converged:
        audit.log_error(run_id, f"residual {fit.residual:.4e} > {cfg.eps_max}: {fit.message}", "non_convergence")
        print(f"❌ Calibration did not reach eps_max={cfg.eps_max} (residual {fit.residual:.4e})")
        return EXIT_NOT_CONVERGED
    print(f"✅ Residual {fit.residual:.6e} <= {cfg.eps_max}")
    return EXIT_OK


def _initial_theta(cfg: RunConfig, circuit: AnsatzCircuit, audit: RunAuditLogger, run_id: str) -> np.ndarray:
    if cfg.theta_file:
        theta0 = load_theta(cfg.theta_file)
        if theta0.shape[0] != circuit.n_params:
            raise UsageError(f"{cfg.theta_file} holds {theta0.shape[0]} values, the ansatz needs {circuit.n_params}")
        print(f"✓ Loaded theta0 from {cfg.theta_file}")
        return theta0

    start = time.time()
    fit = fit_theta0(circuit, cfg.target(), cfg.fit_config(), eps_max=cfg.eps_max)
    audit.log_fit_result(run_id, fit.summary(), (time.time() - start) * 1000)
    if not fit.converged:
        print(f"⚠️  Calibration residual {fit.residual:.4e} exceeds {cfg.eps_max}; continuing")
    return fit.theta0


def _price_rows(cfg: RunConfig, phi: np.ndarray, psi: np.ndarray) -> Dict:
    """Rescale the variational and reference terminal states onto the price grid"""
    consts = cfg.consts()
    tau = consts.tau_max
    if cfg.contract == 'european':
        quantum = rescale_to_price_european(phi, tau, cfg.grid(), consts, cfg.K)
        classical = rescale_to_price_european(psi, tau, cfg.grid(), consts, cfg.K)
        return {
            'grid': quantum.spots,
            'quantum': quantum.prices,
            'classical': classical.prices,
            'quantum_price': quantum.price_at(cfg.S0),
            'classical_price': classical.price_at(cfg.S0),
            'closed_form_price': black_scholes_call(cfg.S0, cfg.K, cfg.sigma, cfg.r, cfg.T),
        }
    quantum = rescale_to_price_asian(phi, tau, cfg.grid(), cfg.S0, cfg.K, cfg.r, cfg.T, cfg.interpolation)
    classical = rescale_to_price_asian(psi, tau, cfg.grid(), cfg.S0, cfg.K, cfg.r, cfg.T, cfg.interpolation)
    return {
        'grid': quantum.y,
        'quantum': cfg.S0 * quantum.Q,
        'classical': cfg.S0 * classical.Q,
        'quantum_price': quantum.price,
        'classical_price': classical.price,
        'closed_form_price': float("nan"),
        "Y0": quantum.Y0,
    }


def cmd_price(cfg: RunConfig, audit: RunAuditLogger) -> int:
    """Evolve theta0 to tau = sigma^2 T and write trace, reference, prices and summary CSVs"""
    run_id = audit.log_run_start("price", cfg.header("price"))
    header = cfg.header("price")
    circuit = build_ansatz(cfg.n_qubits, cfg.n_cells)
    target = cfg.target()
    H = cfg.hamiltonian()
    ecfg = cfg.evolution_config()

    print(f"\n[1/4] 🎯 Initial parameters")
    theta0 = _initial_theta(cfg, circuit, audit, run_id)
    fit_residual = float(np.linalg.norm(prepare_state(circuit, theta0) - target.vector))
    print(f"✓ Initial residual {fit_residual:.6e}")

    print(f"\n[2/4] 📐 Classical reference ({cfg.n_steps} frozen-Hamiltonian steps)")
    taus = np.arange(cfg.n_steps + 1) * ecfg.dtau
    reference = exact_imaginary_evolution_td(H, target.vector, taus, initial_scale=target.norm)
    reference.to_csv(cfg.output_path("reference"), header)

    print(f"\n[3/4] ⏱️  Variational evolution")
    start = time.time()
    try:
        trace = evolve(circuit, theta0, H, ecfg, oracle=reference, audit=audit)
    except DivergenceError as e:
        latency = (time.time() - start) * 1000
        if e.trace is not None:
            e.trace.to_csv(cfg.output_path("trace"), header)
        audit.log_evolution_result(run_id, {'completed': False, 'steps': len(e.trace or [])}, latency, success=False)
        audit.log_error(run_id, str(e), "divergence")
        print(f"❌ {e}")
        print(f"   Partial trace saved to {cfg.output_path('trace')}")
        return EXIT_DIVERGED
    latency = (time.time() - start) * 1000
    trace.to_csv(cfg.output_path("trace"), header)

    print(f"\n[4/4] 💰 Rescaling to prices")
    phi = prepare_state(circuit, trace.final_theta)
    rows = _price_rows(cfg, phi, reference.states[-1])
    prices = pd.DataFrame({
        'grid_value': rows['grid'],
        'quantum_price': rows['quantum'],
        'classical_price': rows['classical'],
        'abs_error': np.abs(rows['quantum'] - rows['classical']),
    })
    write_csv_with_header(prices, cfg.output_path("prices"), header)

    summary = _summary(cfg, trace, rows, fit_residual)
    write_csv_with_header(pd.DataFrame([summary]), cfg.output_path("summary"), header)
    audit.log_evolution_result(run_id, summary, latency)

    print(f"📊 Quantum price:   {summary['quantum_price']:.6f}")
    print(f"📊 Classical price: {summary['classical_price']:.6f}")
    if cfg.contract == 'european':
        print(f"📊 Closed form:     {summary['closed_form_price']:.6f}")
    print(f"📊 Final distance:  {summary['final_oracle_distance']:.4e}")
    print(f"✅ Results written to {cfg.output_dir}")
    return EXIT_OK


def _summary(cfg: RunConfig, trace: EvolutionTrace, rows: Dict, fit_residual: float) -> Dict:
    quantum, classical = rows['quantum_price'], rows['classical_price']
    distances = trace.oracle_distances
    summary = {
        'contract': cfg.contract,
        'quantum_price': quantum,
        'classical_price': classical,
        'closed_form_price': rows['closed_form_price'],
        'abs_error': abs(quantum - classical),
        'rel_error': abs(quantum - classical) / abs(classical) if classical else float("nan"),
        'fit_residual': fit_residual,
        'final_oracle_distance': float(distances[-1]),
        'max_oracle_distance': float(np.nanmax(distances)),
        'degenerate_steps': len(trace.degenerate_steps()),
    }
    if "Y0" in rows:
        summary["Y0"] = rows["Y0"]
    return summary


def cmd_replay(cfg: RunConfig, audit: RunAuditLogger, column: str = "theta", against: str = "payoff") -> int:
    """
    Report the distance between a stored theta and a reference state

    against='payoff' compares with |psi(0)>, against='terminal' with the
    oracle state at tau = sigma^2 T. Report only; never fails on the value.
    """
    run_id = audit.log_run_start("replay", cfg.header("replay"))
    if not cfg.theta_file:
        raise UsageError("replay needs --theta-file")
    circuit = build_ansatz(cfg.n_qubits, cfg.n_cells)
    theta = load_theta(cfg.theta_file, column)
    if theta.shape[0] != circuit.n_params:
        raise UsageError(f"Column {column!r} holds {theta.shape[0]} values, the ansatz needs {circuit.n_params}")

    target = cfg.target()
    if against == 'payoff':
        reference = target.vector
    else:
        taus = np.arange(cfg.n_steps + 1) * cfg.evolution_config().dtau
        reference = exact_imaginary_evolution_td(cfg.hamiltonian(), target.vector, taus).states[-1]

    residual = float(np.linalg.norm(prepare_state(circuit, theta) - reference))
    audit.log_replay(run_id, column, residual, against)
    print(f"📊 Replay {column} against the {against} state: residual {residual:.6e}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--contract", choices=["european", "asian"])
    common.add_argument("--spot", dest="S0", type=float)
    common.add_argument("--strike", dest="K", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--rate", dest="r", type=float)
    common.add_argument("--maturity", dest="T", type=float)
    common.add_argument("--qubits", dest="n_qubits", type=int)
    common.add_argument("--cells", dest="n_cells", type=int)
    common.add_argument("--steps", dest="n_steps", type=int)
    common.add_argument("--cutoff", dest="cutoff_ratio", type=float)
    common.add_argument("--regularization", type=float, help="Tikhonov strength relative to the largest singular value")
    common.add_argument("--mode", choices=["exact", "shots"])
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--s-min", dest="s_min", type=float)
    common.add_argument("--s-max", dest="s_max", type=float)
    common.add_argument("--y-min", dest="y_min", type=float)
    common.add_argument("--y-max", dest="y_max", type=float)
    common.add_argument("--eps-max", dest="eps_max", type=float)
    common.add_argument("--maxiter", type=int, help="Differential-evolution generations")
    common.add_argument("--hamiltonian-path", dest="hamiltonian_path", choices=["dense", "pauli"])
    common.add_argument("--interpolation", choices=["linear", "cubic"])
    common.add_argument("--log-every", dest="log_every", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--log-dir", dest="log_dir", default=None)

    parser = _Parser(prog="qite-pricer", description="Variational imaginary-time option pricer")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common], help="Calibrate theta0 to the payoff")
    fit.add_argument("--search", dest="depth_search", action="store_true", default=None,
                     help="Escalate from 1 cell up to --cells")

    price = sub.add_parser("price", parents=[common], help="Evolve and price")
    price.add_argument("--theta-file", dest="theta_file")

    replay = sub.add_parser("replay", parents=[common], help="Residual of stored parameters")
    replay.add_argument("--theta-file", dest="theta_file", required=True)
    replay.add_argument("--column", default="theta")
    replay.add_argument("--against", choices=["payoff", "terminal"], default="payoff")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    values = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields and v is not None}

    try:
        cfg = RunConfig(**values)
    except ValidationError as e:
        print(f"❌ Invalid configuration:\n{e}")
        return EXIT_USAGE

    audit = RunAuditLogger(args.log_dir or os.getenv("QITE_LOG_DIR", "logs"))
    os.makedirs(cfg.output_dir, exist_ok=True)
    try:
        if args.command == 'fit':
            return cmd_fit(cfg, audit)
        if args.command == 'price':
            return cmd_price(cfg, audit)
        return cmd_replay(cfg, audit, column=args.column, against=args.against)
    except (UsageError, ConfigurationError, ValidationError, ValueError, OSError) as e:
        audit.log_error(None, str(e), "usage")
        print(f"❌ {e}")
        return EXIT_USAGE
    except NumericalError as e:
        audit.log_error(None, str(e), "numerical")
        print(f"❌ Numerical failure: {e}")
        return EXIT_DIVERGED


if __name__ == '__main__':
    sys.exit(main())
