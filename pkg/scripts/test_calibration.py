"""Payoff encoding, initial-parameter fits and depth escalation"""

import numpy as np
import pytest

from ansatz import build_ansatz, prepare_state
from calibration import (
    NOT_CONVERGED_MESSAGE,
    FitConfig,
    FitResult,
    TargetState,
    ansatz_depth_search,
    fit_theta0,
    load_theta,
    payoff_state_asian,
    payoff_state_european,
    save_fit_result,
    state_distance,
    warm_start,
)
from errors import ConfigurationError, UsageError
from hamiltonian import SpaceGrid

QUICK = FitConfig(maxiter=50)


@pytest.fixture
def reachable_target():
    c = build_ansatz(2, 1)
    theta = np.array([0.3, 2.2, -0.7, 1.9, 4.0])
    return c, TargetState(vector=np.real(prepare_state(c, theta)), provenance={"contract": "synthetic"})


def test_european_payoff_state(european_grid, consts):
    target = payoff_state_european(european_grid, 100.0, consts)
    spots = np.exp(european_grid.values)
    assert np.linalg.norm(target.vector) == pytest.approx(1.0)
    assert np.all(target.vector[spots <= 100.0] == 0.0)
    assert np.all(target.vector[spots > 100.0] > 0.0)
    assert target.vector[-1] * target.norm == pytest.approx(50.0 / np.sqrt(150.0))
    assert target.provenance["contract"] == "european"


def test_asian_payoff_state(asian_grid):
    target = payoff_state_asian(asian_grid)
    assert target.dimension == 16
    assert target.vector[-1] * target.norm == pytest.approx(0.4)
    assert np.all(target.vector[asian_grid.values <= 0.0] == 0.0)


def test_vanishing_payoff_is_rejected(consts):
    with pytest.raises(ConfigurationError):
        payoff_state_european(SpaceGrid.european(50.0, 90.0, 4), 100.0, consts)
    with pytest.raises(ConfigurationError):
        payoff_state_asian(SpaceGrid.asian(-0.5, -0.1, 2))


def test_fit_recovers_reachable_state(reachable_target):
    c, target = reachable_target
    result = fit_theta0(c, target, FitConfig(maxiter=500), eps_max=1e-6)
    assert result.converged
    assert result.residual <= 1e-6
    assert result.residual == state_distance(c, result.theta0, target)
    assert result.n_params == 5 and result.n_cells == 1
    assert result.evaluations > 0


def test_fit_is_deterministic(reachable_target):
    c, target = reachable_target
    first = fit_theta0(c, target, QUICK)
    second = fit_theta0(c, target, QUICK)
    np.testing.assert_array_equal(first.theta0, second.theta0)
    assert first.residual == second.residual


def test_fit_never_loses_the_warm_start(reachable_target):
    c, target = reachable_target
    x0 = np.array([0.3, 2.2, -0.7, 1.9, 4.0])
    result = fit_theta0(c, target, FitConfig(maxiter=1, polish=False), x0=x0)
    assert result.residual <= state_distance(c, x0, target)


def test_fit_dimension_mismatch(reachable_target):
    _, target = reachable_target
    with pytest.raises(UsageError):
        fit_theta0(build_ansatz(3, 1), target, QUICK)


def test_warm_start_preserves_state(rng):
    shallow = build_ansatz(3, 1)
    deep = build_ansatz(3, 2)
    theta = rng.uniform(-np.pi, 3 * np.pi, size=shallow.n_params)
    padded = warm_start(theta, deep)
    assert padded.shape == (deep.n_params,)
    np.testing.assert_array_equal(prepare_state(deep, padded), prepare_state(shallow, theta))
    with pytest.raises(UsageError):
        warm_start(padded, shallow)


def test_depth_search_stops_at_first_success():
    target = payoff_state_asian(SpaceGrid.asian(-0.5, 0.4, 2))
    circuit, result = ansatz_depth_search(target, eps_max=1.0, n_cells_max=3, cfg=QUICK)
    assert result.converged
    assert circuit.n_cells == 1
    assert len(result.history) == 1


def test_depth_search_reports_failure(european_grid, consts):
    target = payoff_state_european(european_grid, 100.0, consts)
    circuit, result = ansatz_depth_search(target, eps_max=1e-9, n_cells_max=1, cfg=FitConfig(maxiter=20))
    assert not result.converged
    assert result.message == NOT_CONVERGED_MESSAGE
    assert circuit.n_cells == 1
    assert result.history[0][1] == result.residual


def test_depth_search_empty_range(asian_grid):
    circuit, result = ansatz_depth_search(payoff_state_asian(asian_grid), 0.1, n_cells_max=1, n_cells_start=2)
    assert circuit is None
    assert not result.converged
    assert result.message == NOT_CONVERGED_MESSAGE


@pytest.mark.parametrize("eps_max,n_cells_max", [(0.0, 3), (0.1, 0)])
def test_depth_search_rejects(asian_grid, eps_max, n_cells_max):
    with pytest.raises(ConfigurationError):
        ansatz_depth_search(payoff_state_asian(asian_grid), eps_max, n_cells_max)


def test_depth_search_residual_is_monotone():
    target = payoff_state_asian(SpaceGrid.asian(-0.5, 0.4, 3))
    _, result = ansatz_depth_search(target, eps_max=1e-9, n_cells_max=3, cfg=FitConfig(maxiter=30))
    residuals = [r for _, r in result.history]
    assert [n for n, _ in result.history] == [1, 2, 3]
    assert all(b <= a for a, b in zip(residuals, residuals[1:]))
    assert result.residual == min(residuals)


def test_fit_file_round_trip(tmp_path, reachable_target):
    c, target = reachable_target
    result = fit_theta0(c, target, QUICK)
    path = tmp_path / "fit.csv"
    save_fit_result(result, str(path), {"contract": "synthetic"})
    text = path.read_text()
    assert "# contract=synthetic" in text
    assert "# fit_n_params=5" in text
    theta = load_theta(str(path))
    np.testing.assert_array_equal(theta, result.theta0)
    assert abs(state_distance(c, theta, target) - result.residual) <= 1e-12


def test_saved_parameters_reload_bit_identical(tmp_path, rng):
    for trial in range(5):
        theta0 = rng.uniform(-np.pi, 3 * np.pi, size=25)
        path = tmp_path / f"fit_{trial}.csv"
        save_fit_result(FitResult(theta0=theta0, residual=0.01, n_cells=3, converged=True), str(path))
        np.testing.assert_array_equal(load_theta(str(path)), theta0)


def test_load_published_table(table_path):
    for column in ("european_tau0", "european_tauT", "asian_tau0", "asian_tauT"):
        theta = load_theta(table_path, column)
        assert theta.shape == (25,)
        assert np.all(np.isfinite(theta))
    with pytest.raises(UsageError):
        load_theta(table_path, "bermudan_tau0")
