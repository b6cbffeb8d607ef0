"""Command-line surface: configuration, exit codes and result files"""

import json
import os

import numpy as np
import pandas as pd
import pytest

import cli
from ansatz import AnsatzCircuit, build_ansatz
from calibration import load_theta
from cli import EXIT_DIVERGED, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, RunConfig, main
from errors import DivergenceError
from varqite import EvolutionTrace

RESULT_FILES = ("reference", "trace", "prices", "summary")


def _run(workdir, *args):
    return main(list(args) + ["--output-dir", str(workdir / "out"), "--log-dir", str(workdir / "logs")])


def _events(workdir):
    with open(workdir / "logs" / "audit_trail.jsonl") as f:
        return [json.loads(line) for line in f]


@pytest.fixture
def fitted(tmp_path):
    """2-qubit, 1-cell European fit written by the fit command"""
    code = _run(tmp_path, "fit", "--qubits", "2", "--cells", "1", "--eps-max", "0.5", "--maxiter", "50")
    assert code == EXIT_OK
    return tmp_path / "out" / "fit_european.csv"


def test_run_config_defaults(monkeypatch, tmp_path):
    monkeypatch.setenv("QITE_OUTPUT_DIR", str(tmp_path))
    cfg = RunConfig()
    assert cfg.contract == "european"
    assert (cfg.n_qubits, cfg.n_cells, cfg.n_steps) == (4, 3, 500)
    assert cfg.output_dir == str(tmp_path)
    assert cfg.evolution_config().dtau == pytest.approx(0.04 / 500)
    assert cfg.evolution_config().regularization == 0.0
    header = cfg.header("price")
    assert header["command"] == "price"
    assert "output_dir" not in header and "theta_file" not in header
    assert cfg.output_path("trace") == os.path.join(str(tmp_path), "trace_european.csv")


def test_fit_writes_parameters(fitted):
    theta = load_theta(str(fitted))
    assert theta.shape == (5,)
    text = (fitted.parent / "ansatz_european.txt").read_text()
    assert "# command=fit\n" in text and "# n_qubits=2 n_cells=1 n_params=5\n" in text
    assert AnsatzCircuit.from_text(text) == build_ansatz(2, 1)


def test_fit_not_converged(tmp_path):
    code = _run(tmp_path, "fit", "--qubits", "4", "--cells", "1", "--eps-max", "1e-9", "--maxiter", "5")
    assert code == EXIT_NOT_CONVERGED
    assert (tmp_path / "out" / "fit_european.csv").exists()
    assert any(e["event_type"] == "error" and e["error_type"] == "non_convergence" for e in _events(tmp_path))


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["replay", "--output-dir", str(tmp_path)])
    assert info.value.code == EXIT_USAGE
    assert _run(tmp_path, "fit", "--sigma", "-1") == EXIT_USAGE
    assert _run(tmp_path, "fit", "--qubits", "7") == EXIT_USAGE


def test_theta_count_mismatch(tmp_path, fitted):
    code = _run(tmp_path, "price", "--qubits", "2", "--cells", "2", "--steps", "2", "--theta-file", str(fitted))
    assert code == EXIT_USAGE


def test_price_writes_results(tmp_path, fitted):
    code = _run(tmp_path, "price", "--qubits", "2", "--cells", "1", "--steps", "5", "--theta-file", str(fitted))
    assert code == EXIT_OK
    out = tmp_path / "out"
    for kind in RESULT_FILES:
        assert (out / f"{kind}_european.csv").exists()

    summary = pd.read_csv(out / "summary_european.csv", comment="#").iloc[0]
    assert summary["closed_form_price"] == pytest.approx(7.9656, abs=1e-4)
    assert summary["abs_error"] == pytest.approx(abs(summary["quantum_price"] - summary["classical_price"]))
    prices = pd.read_csv(out / "prices_european.csv", comment="#")
    assert list(prices.columns) == ["grid_value", "quantum_price", "classical_price", "abs_error"]
    assert prices["quantum_price"].iloc[-1] == pytest.approx(50.0)
    trace = pd.read_csv(out / "trace_european.csv", comment="#")
    assert len(trace) == 6
    assert trace["oracle_distance"].iloc[0] == pytest.approx(summary["fit_residual"], abs=1e-9)


@pytest.mark.parametrize("extra", [[], ["--mode", "shots", "--shots", "100000", "--seed", "7"]])
def test_price_is_reproducible(tmp_path, fitted, extra):
    args = ["price", "--qubits", "2", "--cells", "1", "--steps", "5", "--theta-file", str(fitted)] + extra
    for name in ("first", "second"):
        assert main(args + ["--output-dir", str(tmp_path / name), "--log-dir", str(tmp_path / "logs")]) == EXIT_OK
    for kind in RESULT_FILES:
        first = (tmp_path / "first" / f"{kind}_european.csv").read_bytes()
        second = (tmp_path / "second" / f"{kind}_european.csv").read_bytes()
        assert first == second


def test_asian_price(tmp_path):
    assert _run(tmp_path, "fit", "--contract", "asian", "--qubits", "2", "--cells", "1",
                "--eps-max", "0.5", "--maxiter", "50") == EXIT_OK
    theta_file = tmp_path / "out" / "fit_asian.csv"
    code = _run(tmp_path, "price", "--contract", "asian", "--qubits", "2", "--cells", "1", "--steps", "4",
                "--theta-file", str(theta_file))
    assert code == EXIT_OK
    summary = pd.read_csv(tmp_path / "out" / "summary_asian.csv", comment="#").iloc[0]
    assert summary["Y0"] == pytest.approx(0.0, abs=1e-12)
    assert np.isnan(summary["closed_form_price"])
    prices = pd.read_csv(tmp_path / "out" / "prices_asian.csv", comment="#")
    assert prices["classical_price"].iloc[-1] == pytest.approx(40.0)


def test_divergence_exit_code(tmp_path, fitted, monkeypatch):
    def diverge(*args, **kwargs):
        raise DivergenceError("|theta_dot| too large", trace=EvolutionTrace())

    monkeypatch.setattr(cli, "evolve", diverge)
    code = _run(tmp_path, "price", "--qubits", "2", "--cells", "1", "--steps", "3", "--theta-file", str(fitted))
    assert code == EXIT_DIVERGED
    assert any(e["event_type"] == "error" and e["error_type"] == "divergence" for e in _events(tmp_path))


def test_replay_published_table(tmp_path, table_path):
    assert _run(tmp_path, "replay", "--theta-file", table_path, "--column", "european_tau0") == EXIT_OK
    assert _run(tmp_path, "replay", "--theta-file", table_path, "--column", "asian_tauT",
                "--contract", "asian", "--against", "terminal", "--steps", "50") == EXIT_OK
    replays = [e for e in _events(tmp_path) if e["event_type"] == "replay"]
    assert [e["column"] for e in replays] == ["european_tau0", "asian_tauT"]
    assert [e["reference"] for e in replays] == ["payoff", "terminal"]
    assert all(0.0 <= e["residual"] <= 2.0 for e in replays)


def test_replay_unknown_column(tmp_path, table_path):
    assert _run(tmp_path, "replay", "--theta-file", table_path, "--column", "missing") == EXIT_USAGE
