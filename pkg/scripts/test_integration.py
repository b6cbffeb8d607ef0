#!/usr/bin/env python3
"""
End-to-end checks across calibration, evolution, oracles and audit logging

Tests marked slow reproduce the full 4-qubit, 25-parameter experiments and are
deselected by default; run them with `pytest -m slow`.
"""

import json
import os

import numpy as np
import pytest

from ansatz import build_ansatz, derivative_state_fd, derivative_states, prepare_state
from audit import RunAuditLogger
from calibration import FitConfig, fit_theta0, load_theta, payoff_state_asian, payoff_state_european, state_distance
from hamiltonian import SpaceGrid, TransformConstants, asian_hamiltonian, european_hamiltonian, pauli_decompose
from oracle import exact_imaginary_evolution_td, rescale_to_price_asian, rescale_to_price_european
from varqite import (
    EvolutionConfig,
    assemble_A,
    assemble_A_hadamard,
    assemble_C,
    assemble_C_hadamard,
    evolve,
    hadamard_test_entry,
)

CONSTS = TransformConstants(sigma=0.2, r=0.0, T=1.0)
EUROPEAN_GRID = SpaceGrid.european(50.0, 150.0, 4)
ASIAN_GRID = SpaceGrid.asian(-0.5, 0.4, 4)
EPS_MAX = 0.05
N_STEPS = 500
ASIAN_REGULARIZATION = 1e-4
TABLE_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "table3_theta.csv")


# --- audit trail ----------------------------------------------------------------


def test_audit_trail_summary(tmp_path):
    audit = RunAuditLogger(str(tmp_path))
    run_id = audit.log_run_start("price", {"contract": "european"})
    audit.log_fit_result(run_id, {"residual": 0.01, "converged": True}, latency_ms=12.0)
    for k in range(3):
        audit.log_step(k, 0.01 * k, 0.002, 0.5, 1e-12, oracle_distance=0.01)
    audit.log_evolution_result(run_id, {"quantum_price": np.float64(7.9)}, latency_ms=6.0)
    audit.log_error(run_id, "boom", "divergence")

    summary = audit.get_audit_summary()
    assert summary["event_breakdown"] == {
        "session_start": 1, "run_start": 1, "fit_result": 1, "evolution_result": 1, "error": 1,
    }
    assert summary["runs"]["commands"] == ["price"]
    assert summary["fits"] == {"total": 1, "converged": 1, "best_residual": 0.01}
    assert summary["evolutions"]["completed"] == 1
    assert summary["errors"] == {"total": 1, "types": {"divergence": 1}}
    assert audit.get_audit_summary(since_timestamp="9999")["message"] == "No logs in time range"


def test_performance_report_and_export(tmp_path):
    audit = RunAuditLogger(str(tmp_path))
    assert audit.get_performance_report()["message"] == "No operations performed yet"
    for k in range(4):
        audit.log_step(k, 0.01 * k, 0.001 * (k + 1), 0.5, 0.0)
    report = audit.get_performance_report()
    assert report["step_performance"]["count"] == 4
    assert report["step_performance"]["max_latency_ms"] == pytest.approx(4.0)
    assert report["fit_performance"] == {"count": 0}

    with open(tmp_path / "metrics.jsonl") as f:
        metrics = [json.loads(line) for line in f]
    assert [m["step"] for m in metrics] == [0, 1, 2, 3]

    out = tmp_path / "report.txt"
    audit.export_audit_report(str(out))
    assert "PRICING RUN AUDIT REPORT" in out.read_text()


# --- small pipeline ---------------------------------------------------------------


def test_two_qubit_pipeline(tmp_path):
    grid = SpaceGrid.european(50.0, 150.0, 2)
    target = payoff_state_european(grid, 100.0, CONSTS)
    circuit = build_ansatz(2, 1)
    fit = fit_theta0(circuit, target, FitConfig(maxiter=200), eps_max=EPS_MAX)
    assert fit.residual == pytest.approx(state_distance(circuit, fit.theta0, target))

    H = european_hamiltonian(grid, CONSTS)
    cfg = EvolutionConfig.for_horizon(CONSTS.tau_max, n_steps=20, log_every=0)
    oracle = exact_imaginary_evolution_td(H, target.vector, np.arange(21) * cfg.dtau)
    audit = RunAuditLogger(str(tmp_path))
    trace = evolve(circuit, fit.theta0, H, cfg, oracle=oracle, audit=audit)

    assert trace.completed and len(trace) == 21
    assert trace.oracle_distances[0] == pytest.approx(fit.residual, abs=1e-12)
    assert np.all(np.isfinite(trace.oracle_distances))
    assert audit.get_performance_report()["step_performance"]["count"] == 21

    curve = rescale_to_price_european(prepare_state(circuit, trace.final_theta), CONSTS.tau_max, grid, CONSTS, 100.0)
    assert curve.prices[-1] == pytest.approx(50.0)


# --- full-size acceptance runs ---------------------------------------------------------


@pytest.fixture(scope="module")
def full_circuit():
    return build_ansatz(4, 3)


@pytest.fixture(scope="module")
def european_fit(full_circuit):
    target = payoff_state_european(EUROPEAN_GRID, 100.0, CONSTS)
    return target, fit_theta0(full_circuit, target, FitConfig(seed=0), eps_max=EPS_MAX)


@pytest.fixture(scope="module")
def asian_fit(full_circuit):
    target = payoff_state_asian(ASIAN_GRID)
    published = load_theta(TABLE_PATH, "asian_tau0")
    return target, fit_theta0(full_circuit, target, FitConfig(seed=0), eps_max=EPS_MAX, x0=published)


@pytest.mark.slow
def test_derivatives_on_many_points(full_circuit):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        theta = rng.uniform(-np.pi, 3 * np.pi, size=25)
        exact = derivative_states(full_circuit, theta)
        fd = np.array([derivative_state_fd(full_circuit, theta, k, h=1e-5).vector for k in range(1, 26)])
        np.testing.assert_allclose(exact, fd, atol=1e-6)


@pytest.mark.slow
def test_ancilla_circuits_reproduce_the_system(full_circuit):
    rng = np.random.default_rng(7)
    exact_cfg = EvolutionConfig(dtau=0.01)
    H = european_hamiltonian(EUROPEAN_GRID, CONSTS).matrix
    decomposition = pauli_decompose(H)
    for _ in range(3):
        theta = rng.uniform(-np.pi, 3 * np.pi, size=25)
        np.testing.assert_allclose(assemble_A_hadamard(full_circuit, theta, exact_cfg),
                                   assemble_A(full_circuit, theta), atol=1e-10)
        np.testing.assert_allclose(assemble_C_hadamard(full_circuit, theta, decomposition, exact_cfg),
                                   assemble_C(full_circuit, theta, H), atol=1e-10)

    theta = rng.uniform(-np.pi, 3 * np.pi, size=25)
    shots_cfg = EvolutionConfig(dtau=0.01, mode="shots", shots=1_000_000, rng_seed=11)
    estimate = hadamard_test_entry(full_circuit, theta, 2, 8, shots_cfg)
    assert estimate == pytest.approx(assemble_A(full_circuit, theta)[1, 7], abs=3e-3)


@pytest.mark.slow
def test_payoff_calibration(european_fit, asian_fit):
    for target, fit in (european_fit, asian_fit):
        assert fit.n_params == 25
        assert fit.residual <= EPS_MAX
        assert fit.converged


def _european_run(circuit, fit, target, n_steps):
    H = european_hamiltonian(EUROPEAN_GRID, CONSTS)
    cfg = EvolutionConfig.for_horizon(CONSTS.tau_max, n_steps=n_steps, cutoff_ratio=1e-8, log_every=100)
    oracle = exact_imaginary_evolution_td(H, target.vector, np.arange(n_steps + 1) * cfg.dtau)
    return oracle, evolve(circuit, fit.theta0, H, cfg, oracle=oracle)


@pytest.fixture(scope="module")
def european_run(full_circuit, european_fit):
    target, fit = european_fit
    return _european_run(full_circuit, fit, target, N_STEPS)


@pytest.mark.slow
def test_european_trajectory_and_price(full_circuit, european_fit, european_run):
    target, fit = european_fit
    oracle, trace = european_run

    distances = trace.oracle_distances
    assert np.all(distances <= 2 * (fit.residual + 0.05))
    assert distances[-1] <= 0.1

    quantum = rescale_to_price_european(prepare_state(full_circuit, trace.final_theta), CONSTS.tau_max,
                                        EUROPEAN_GRID, CONSTS, 100.0)
    classical = rescale_to_price_european(oracle.states[-1], CONSTS.tau_max, EUROPEAN_GRID, CONSTS, 100.0)
    assert quantum.price_at(100.0) == pytest.approx(classical.price_at(100.0), rel=0.05)


@pytest.mark.slow
def test_european_step_halving_is_stable(full_circuit, european_fit, european_run):
    target, fit = european_fit
    _, coarse = european_run
    _, fine = _european_run(full_circuit, fit, target, 2 * N_STEPS)
    assert fine.completed and len(fine) == 2 * N_STEPS + 1
    d_coarse, d_fine = coarse.oracle_distances[-1], fine.oracle_distances[-1]
    print(f"📊 final distance: {d_coarse:.4e} (500 steps), {d_fine:.4e} (1000 steps)")
    assert abs(d_fine - d_coarse) < d_coarse


@pytest.mark.slow
def test_asian_pipeline(full_circuit, asian_fit):
    target, fit = asian_fit
    H = asian_hamiltonian(ASIAN_GRID, 0.0, CONSTS)
    cfg = EvolutionConfig.for_horizon(CONSTS.tau_max, n_steps=N_STEPS, regularization=ASIAN_REGULARIZATION,
                                      log_every=100)
    oracle = exact_imaginary_evolution_td(H, target.vector, np.arange(N_STEPS + 1) * cfg.dtau)
    trace = evolve(full_circuit, fit.theta0, H, cfg, oracle=oracle)
    assert trace.completed
    print(f"📊 fit residual {fit.residual:.4e}, worst oracle distance {trace.oracle_distances.max():.4e}")
    assert np.all(trace.oracle_distances <= 2 * (fit.residual + 0.05))

    args = (CONSTS.tau_max, ASIAN_GRID, 100.0, 100.0, CONSTS.r, CONSTS.T)
    quantum = rescale_to_price_asian(prepare_state(full_circuit, trace.final_theta), *args)
    classical = rescale_to_price_asian(oracle.states[-1], *args)
    interior = slice(1, -1)
    mask = classical.Q[interior] >= 0.01
    np.testing.assert_allclose(quantum.Q[interior][mask], classical.Q[interior][mask], rtol=0.05)


@pytest.mark.slow
def test_published_parameters_replay(full_circuit, table_path):
    for contract, target in (("european", payoff_state_european(EUROPEAN_GRID, 100.0, CONSTS)),
                             ("asian", payoff_state_asian(ASIAN_GRID))):
        theta = load_theta(table_path, f"{contract}_tau0")
        residual = state_distance(full_circuit, theta, target)
        print(f"📊 {contract} published theta0 residual: {residual:.4e}")
        assert 0.0 <= residual <= 2.0
