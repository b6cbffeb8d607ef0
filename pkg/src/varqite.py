#!/usr/bin/env python3
"""
Variational Imaginary Time Evolution
Assembles the McLachlan system A theta_dot = C, solves it by truncated SVD
least squares and marches theta forward with Euler steps
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ansatz import AnsatzCircuit, apply_gate, check_theta, derivative_states, generator_term_states, prepare_state
from errors import ConfigurationError, DivergenceError, NumericalError, UsageError
from hamiltonian import PAULI_MATRICES, HamiltonianSpec, PauliDecomposition, apply_pauli_string, pauli_decompose
from oracle import ReferenceTrajectory, write_csv_with_header
from statevector import (
    apply_controlled,
    apply_dense,
    apply_single,
    expectation_z,
    gate_h,
    gate_s_dagger,
    gate_x,
    inner_product,
    zero_state,
)

ANCILLA = 1
SYMMETRY_TOLERANCE = 1e-10
PSD_TOLERANCE = 1e-10
WEIGHT_TOLERANCE = 1e-15

# (gate position the Pauli product follows, Pauli product on system qubits)
Insertion = Tuple[int, Tuple[Tuple[str, int], ...]]
HamiltonianInput = Union[HamiltonianSpec, np.ndarray]


class EvolutionConfig(BaseModel):
    """Euler march settings; n_steps * dtau is the scaled-time horizon"""

    dtau: float = Field(..., gt=0)
    n_steps: int = Field(500, ge=1)
    cutoff_ratio: float = Field(1e-8, gt=0, lt=1)
    regularization: float = Field(0.0, ge=0, lt=1)
    mode: Literal["exact", "shots"] = "exact"
    shots: int = Field(0, ge=0)
    rng_seed: int = 0
    hamiltonian_path: Literal["dense", "pauli"] = "dense"
    phase_correction: bool = False
    divergence_limit: float = Field(1e6, gt=0)
    log_every: int = Field(50, ge=0)
    check_invariants: bool = True

    @classmethod
    def for_horizon(cls, horizon: float, n_steps: int = 500, **kwargs) -> "EvolutionConfig":
        """Split [0, horizon] into n_steps equal steps"""
        if horizon <= 0:
            raise ConfigurationError(f"Horizon must be positive, got {horizon}")
        return cls(dtau=horizon / n_steps, n_steps=n_steps, **kwargs)

    @property
    def horizon(self) -> float:
        return self.dtau * self.n_steps


@dataclass
class McLachlanSystem:
    """A and C at one parameter point"""

    A: np.ndarray
    C: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        if not self.A.size:
            return 0.0
        return float(np.linalg.eigvalsh(0.5 * (self.A + self.A.T)).min())

    def check(self) -> float:
        """
        Raise NumericalError unless A is symmetric and positive semidefinite

        Returns:
            Smallest eigenvalue of A
        """
        asym = float(np.max(np.abs(self.A - self.A.T))) if self.A.size else 0.0
        if asym > SYMMETRY_TOLERANCE:
            raise NumericalError(f"A is not symmetric: max |A - A^T| = {asym:.3e}")
        lowest = self.min_eigenvalue
        if lowest < -PSD_TOLERANCE:
            raise NumericalError(f"A is not positive semidefinite: min eigenvalue {lowest:.3e}")
        return lowest


def _matrix_of(H: HamiltonianInput, tau: float = 0.0) -> np.ndarray:
    if isinstance(H, HamiltonianSpec):
        return H.at(tau)
    return np.asarray(H)


def _check_dimension(c: AnsatzCircuit, m: np.ndarray):
    if m.shape != (c.dimension, c.dimension):
        raise UsageError(f"Hamiltonian {m.shape} does not match a {c.n_qubits}-qubit circuit")


def assemble_A(c: AnsatzCircuit, theta: Sequence[float]) -> np.ndarray:
    """
    A_ij = Re <d_i phi | d_j phi>

    Args:
        c: Ansatz circuit
        theta: Parameter vector

    Returns:
        Symmetric positive semidefinite N x N matrix
    """
    d = derivative_states(c, theta)
    gram = np.real(d.conj() @ d.T)
    return 0.5 * (gram + gram.T)


def assemble_C(c: AnsatzCircuit, theta: Sequence[float], H: HamiltonianInput, tau: float = 0.0,
               path: str = "dense", decomposition: Optional[PauliDecomposition] = None,
               phase_correction: bool = False) -> np.ndarray:
    """
    C_i = Re <d_i phi | H | phi>, no leading minus (e^{+H tau} propagator)

    Args:
        c: Ansatz circuit
        theta: Parameter vector
        H: Dense Hamiltonian or HamiltonianSpec (evaluated at tau)
        tau: Scaled time for time-dependent Hamiltonians
        path: 'dense' multiplies by the matrix, 'pauli' sums lambda_j <d_i phi|h_j phi>
        decomposition: Pauli terms to use on the 'pauli' path (computed when omitted)
        phase_correction: Subtract Re<d_i phi|phi> <phi|H|phi>

    Returns:
        Real vector of length N
    """
    m = _matrix_of(H, tau)
    _check_dimension(c, m)
    phi = prepare_state(c, theta)
    d = derivative_states(c, theta)

    if path == 'dense':
        h_phi = apply_dense(m, phi)
    elif path == 'pauli':
        decomposition = decomposition or pauli_decompose(m)
        h_phi = np.zeros_like(phi)
        for label, coeff in decomposition.terms:
            h_phi = h_phi + coeff * apply_pauli_string(label, phi)
    else:
        raise UsageError(f"Unknown Hamiltonian path {path!r}")

    C = np.real(d.conj() @ h_phi)
    if phase_correction:
        energy = inner_product(phi, h_phi).real
        C = C - np.real(d.conj() @ phi) * energy
    return C


# --- Hadamard-test measurement ----------------------------------------------


def sample_pm1(values: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """
    Shot estimates of +/-1 observables with the given exact expectations

    Each value v sets P(outcome +1) = (1 + v) / 2; the estimate is 2k/shots - 1
    for k ~ Binomial(shots, P).
    """
    if shots < 1:
        raise ConfigurationError("Shot mode needs shots >= 1")
    p = np.clip((1.0 + np.asarray(values, dtype=float)) / 2.0, 0.0, 1.0)
    return 2.0 * rng.binomial(shots, p) / shots - 1.0


def _require_shots(cfg: EvolutionConfig):
    if cfg.mode == 'shots' and cfg.shots < 1:
        raise ConfigurationError("Shot mode needs shots >= 1")


def _estimate(value: float, cfg: EvolutionConfig, rng: np.random.Generator) -> float:
    if cfg.mode == 'exact':
        return value
    return float(sample_pm1(np.array([value]), cfg.shots, rng)[0])


def ancilla_expectation(c: AnsatzCircuit, theta: Sequence[float], first: Insertion,
                        second: Insertion, imaginary: bool = False) -> float:
    """
    Exact ancilla <Z> of the indirect-measurement circuit

    The ancilla (qubit 1, system qubits shifted by one) gets H, optionally S^dagger,
    then X. The first Pauli product is applied controlled on the ancilla after
    its gate, the ancilla is flipped back with X, and the second product follows
    after its own gate. A final H maps the interference onto <Z>:

        <Z> = Re <first|second>     (imaginary=False)
        <Z> = Im <first|second>     (imaginary=True)

    Args:
        c: Ansatz circuit on the system register
        theta: Parameter vector
        first: Insertion at the earlier (or equal) gate position
        second: Insertion at the later gate position; len(c.gates) means after the circuit
        imaginary: Add S^dagger to read out the imaginary part

    Returns:
        Ancilla Z expectation in [-1, 1]
    """
    theta = check_theta(c, theta)
    if first[0] > second[0]:
        raise UsageError("first insertion must not follow the second")

    s = zero_state(c.n_qubits + 1)
    s = apply_single(gate_h(), ANCILLA, s)
    if imaginary:
        s = apply_single(gate_s_dagger(), ANCILLA, s)
    s = apply_single(gate_x(), ANCILLA, s)

    pending = [first, second]
    for pos in range(len(c.gates) + 1):
        if pos < len(c.gates):
            s = apply_gate(c.gates[pos], theta, s, offset=1)
        while pending and pending[0][0] == pos:
            _, paulis = pending.pop(0)
            for ch, q in paulis:
                s = apply_controlled(PAULI_MATRICES[ch], ANCILLA, q + 1, s)
            if len(pending) == 1:
                s = apply_single(gate_x(), ANCILLA, s)

    s = apply_single(gate_h(), ANCILLA, s)
    return expectation_z(ANCILLA, s)


def _overlap_part(c, theta, left: Insertion, right: Insertion, imaginary: bool,
                  cfg: EvolutionConfig, rng: np.random.Generator) -> float:
    """Re or Im of <left|right>, reordering the insertions by gate position"""
    if left[0] <= right[0]:
        return _estimate(ancilla_expectation(c, theta, left, right, imaginary), cfg, rng)
    value = _estimate(ancilla_expectation(c, theta, right, left, imaginary), cfg, rng)
    return -value if imaginary else value


def _weighted_overlap(c, theta, left: List[Tuple[complex, Insertion]], right: List[Tuple[complex, Insertion]],
                      cfg: EvolutionConfig, rng: np.random.Generator) -> float:
    """Re sum_ab conj(f_a) g_b <a|b>, measuring only the parts the weights need"""
    total = 0.0
    for fa, ia in left:
        for gb, ib in right:
            w = np.conj(fa) * gb
            if abs(w.real) > WEIGHT_TOLERANCE:
                total += w.real * _overlap_part(c, theta, ia, ib, False, cfg, rng)
            if abs(w.imag) > WEIGHT_TOLERANCE:
                total -= w.imag * _overlap_part(c, theta, ia, ib, True, cfg, rng)
    return float(total)


def _param_insertions(c: AnsatzCircuit, k: int) -> List[Tuple[complex, Insertion]]:
    pos = c.position_of(k)
    return [(term.coefficient, (pos, term.paulis)) for term in c.generator_terms(k)]


def _label_insertion(c: AnsatzCircuit, label: str) -> Insertion:
    if len(label) != c.n_qubits or any(ch not in PAULI_MATRICES for ch in label):
        raise UsageError(f"Pauli label {label!r} does not fit a {c.n_qubits}-qubit circuit")
    paulis = tuple((ch, q) for q, ch in enumerate(label, start=1) if ch != "I")
    return (len(c.gates), paulis)


def hadamard_test_entry(c: AnsatzCircuit, theta: Sequence[float], i: int, j: Union[int, str],
                        cfg: EvolutionConfig, rng: Optional[np.random.Generator] = None) -> float:
    """
    One McLachlan overlap estimated through ancilla circuits

    Args:
        c: Ansatz circuit
        theta: Parameter vector
        i: Parameter index (bra side)
        j: Parameter index for an A entry, or a Pauli label for a C contribution
        cfg: Exact or shot mode
        rng: Generator for shot sampling (seeded from cfg.rng_seed when omitted)

    Returns:
        A_ij, or Re <d_i phi | h_j | phi> when j is a Pauli label
    """
    _require_shots(cfg)
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    left = _param_insertions(c, i)
    if isinstance(j, str):
        right = [(1.0 + 0.0j, _label_insertion(c, j))]
    else:
        right = _param_insertions(c, j)
    return _weighted_overlap(c, theta, left, right, cfg, rng)


def assemble_A_hadamard(c: AnsatzCircuit, theta: Sequence[float], cfg: EvolutionConfig,
                        rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """A from ancilla circuits; upper triangle measured, lower mirrored"""
    _require_shots(cfg)
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    n = c.n_params
    A = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            A[i - 1, j - 1] = A[j - 1, i - 1] = hadamard_test_entry(c, theta, i, j, cfg, rng)
    return A


def assemble_C_hadamard(c: AnsatzCircuit, theta: Sequence[float], decomposition: PauliDecomposition,
                        cfg: EvolutionConfig, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """C_i = Re sum_j lambda_j <d_i phi|h_j|phi> from ancilla circuits"""
    _require_shots(cfg)
    if decomposition.n_qubits != c.n_qubits:
        raise UsageError("Pauli decomposition does not match the circuit width")
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    right = [(complex(coeff), _label_insertion(c, label)) for label, coeff in decomposition.terms]
    return np.array([
        _weighted_overlap(c, theta, _param_insertions(c, i), right, cfg, rng)
        for i in range(1, c.n_params + 1)
    ])


def _sampled_parts(z: np.ndarray, w: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Shot estimate of Re(w z) sampling Re z and Im z only where w needs them"""
    out = np.zeros(z.shape)
    need_re = np.abs(w.real) > WEIGHT_TOLERANCE
    need_im = np.abs(w.imag) > WEIGHT_TOLERANCE
    out[need_re] += w.real[need_re] * sample_pm1(z.real[need_re], shots, rng)
    out[need_im] -= w.imag[need_im] * sample_pm1(z.imag[need_im], shots, rng)
    return out


def sampled_system(c: AnsatzCircuit, theta: Sequence[float], decomposition: PauliDecomposition,
                   shots: int, rng: np.random.Generator) -> McLachlanSystem:
    """
    Shot-sampled A and C

    Every Hadamard-test outcome is drawn binomially from its exact ancilla
    probability, which is the distribution the ancilla circuit produces, so the
    estimator matches assemble_A_hadamard / assemble_C_hadamard in shot mode.
    Each symmetric overlap pair is measured once.
    """
    terms = generator_term_states(c, theta)
    owners = np.zeros((c.n_params, len(terms)))
    owners[terms.owners - 1, np.arange(len(terms))] = 1.0
    f = terms.coefficients
    V = terms.vectors

    G = V.conj() @ V.T
    W = np.conj(f)[:, None] * f[None, :]
    upper = np.triu(np.ones(G.shape, dtype=bool))
    sampled = np.zeros(G.shape)
    sampled[upper] = _sampled_parts(G[upper], W[upper], shots, rng)
    lower = ~upper
    # Re(w z) is symmetric under a <-> b because W and G are Hermitian
    sampled[lower] = sampled.T[lower]
    A = owners @ sampled @ owners.T

    phi = prepare_state(c, theta)
    labels = [label for label, _ in decomposition.terms]
    lam = np.array([coeff for _, coeff in decomposition.terms], dtype=complex)
    h_phi = np.array([apply_pauli_string(label, phi) for label in labels])
    Z = V.conj() @ h_phi.T
    Wc = np.conj(f)[:, None] * lam[None, :]
    C = owners @ _sampled_parts(Z, Wc, shots, rng).sum(axis=1)
    return McLachlanSystem(A=A, C=C)


# --- least squares ------------------------------------------------------------


@dataclass
class ThetaDot:
    """Least-squares velocity plus solve diagnostics"""

    value: np.ndarray
    singular_values: np.ndarray
    rank: int
    residual: float
    degenerate: bool = False

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.value))

    @property
    def condition(self) -> float:
        """s_max over the smallest kept singular value (inf when nothing is kept)"""
        if self.rank == 0:
            return float("inf")
        return float(self.singular_values[0] / self.singular_values[self.rank - 1])


def solve_thetadot(A: np.ndarray, C: np.ndarray, cutoff_ratio: float = 1e-8,
                   regularization: float = 0.0) -> ThetaDot:
    """
    Minimum-norm least squares with a relative singular-value cutoff

    With regularization > 0 the kept modes are Tikhonov-filtered, 1/s becoming
    s / (s^2 + lam^2) with lam = regularization * s_max, which bounds the
    velocity along modes that only just clear the cutoff.

    Args:
        A: N x N system matrix
        C: Right-hand side of length N
        cutoff_ratio: Singular values below cutoff_ratio * s_max are dropped
        regularization: Tikhonov strength relative to s_max; 0 is the plain pseudo-inverse

    Returns:
        ThetaDot; degenerate=True (and a zero vector) when every mode is dropped
    """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != C.shape[0]:
        raise UsageError(f"Incompatible system: A {A.shape}, C {C.shape}")
    if not 0 < cutoff_ratio < 1:
        raise ConfigurationError(f"cutoff_ratio must lie in (0, 1), got {cutoff_ratio}")
    if not 0 <= regularization < 1:
        raise ConfigurationError(f"regularization must lie in [0, 1), got {regularization}")

    U, s, Vh = np.linalg.svd(A)
    keep = s > cutoff_ratio * s[0] if s.size and s[0] > 0 else np.zeros(s.shape, dtype=bool)
    if not keep.any():
        return ThetaDot(value=np.zeros(A.shape[1]), singular_values=s, rank=0,
                        residual=float(np.linalg.norm(C)), degenerate=True)

    kept = s[keep]
    lam = regularization * s[0]
    coeffs = (U[:, keep].T @ C) * kept / (kept ** 2 + lam ** 2)
    value = Vh[keep].T @ coeffs
    residual = float(np.linalg.norm(A @ value - C))
    return ThetaDot(value=value, singular_values=s, rank=int(keep.sum()), residual=residual)


# --- Euler march --------------------------------------------------------------


@dataclass
class StepRecord:
    step: int
    tau: float
    theta: np.ndarray
    theta_dot_norm: float
    residual: float
    oracle_distance: Optional[float]
    wall_time: float
    rank: int
    condition: float
    min_eigenvalue: float
    degenerate: bool = False


@dataclass
class EvolutionTrace:
    """Per-step records of an Euler march, step 0 included"""

    records: List[StepRecord] = field(default_factory=list)
    completed: bool = False

    def __len__(self) -> int:
        return len(self.records)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.records])

    @property
    def final_theta(self) -> np.ndarray:
        return self.records[-1].theta

    @property
    def oracle_distances(self) -> np.ndarray:
        return np.array([np.nan if r.oracle_distance is None else r.oracle_distance for r in self.records])

    def degenerate_steps(self) -> List[int]:
        return [r.step for r in self.records if r.degenerate]

    def to_dataframe(self) -> pd.DataFrame:
        """step,tau,theta_1..theta_N,residual,rank,condition,min_eigenvalue,oracle_distance (no wall times)"""
        cols: Dict[str, np.ndarray] = {
            'step': np.array([r.step for r in self.records]),
            'tau': np.array([r.tau for r in self.records]),
        }
        thetas = self.thetas
        for k in range(thetas.shape[1] if thetas.ndim == 2 else 0):
            cols[f"theta_{k + 1}"] = thetas[:, k]
        cols['residual'] = np.array([r.residual for r in self.records])
        cols['rank'] = np.array([r.rank for r in self.records], dtype=int)
        cols['condition'] = np.array([r.condition for r in self.records])
        cols['min_eigenvalue'] = np.array([r.min_eigenvalue for r in self.records])
        cols['oracle_distance'] = self.oracle_distances
        return pd.DataFrame(cols)

    def to_csv(self, path: str, header: Optional[Dict] = None):
        write_csv_with_header(self.to_dataframe(), path, header)


def step_generators(seed: int, n: int) -> List[np.random.Generator]:
    """Independent per-step generators spawned from one seed"""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]


def evolve(c: AnsatzCircuit, theta0: Sequence[float], H: HamiltonianInput, cfg: EvolutionConfig,
           oracle: Optional[ReferenceTrajectory] = None, audit=None) -> EvolutionTrace:
    """
    Euler march theta_{k+1} = theta_k + dtau * theta_dot_k

    Each step freezes a time-dependent Hamiltonian at the left endpoint tau_k
    (and re-decomposes it into Pauli terms when the Pauli path or shot mode is
    used), assembles A and C, solves for theta_dot and advances theta. Shot
    mode always measures through Pauli terms.

    Args:
        c: Ansatz circuit
        theta0: Calibrated initial parameters
        H: Constant matrix or HamiltonianSpec (time-dependent specs are re-evaluated)
        cfg: Step size, cutoff, mode and guards
        oracle: Reference trajectory on the same tau grid, for distance tracking
        audit: Optional RunAuditLogger receiving per-step metrics

    Returns:
        EvolutionTrace with n_steps + 1 records

    Raises:
        DivergenceError: |theta_dot| exceeded cfg.divergence_limit; .trace holds the partial run
    """
    theta = check_theta(c, theta0).copy()
    _require_shots(cfg)
    if cfg.mode == 'shots' and cfg.phase_correction:
        raise ConfigurationError("phase correction is only available in exact mode")
    if oracle is not None and len(oracle) < cfg.n_steps + 1:
        raise UsageError(f"Reference trajectory has {len(oracle)} points, need {cfg.n_steps + 1}")

    time_dependent = isinstance(H, HamiltonianSpec) and H.time_dependent
    use_pauli = cfg.mode == 'shots' or cfg.hamiltonian_path == 'pauli'
    m = _matrix_of(H, 0.0)
    _check_dimension(c, m)
    decomposition = pauli_decompose(m) if use_pauli else None
    rngs = step_generators(cfg.rng_seed, cfg.n_steps + 1) if cfg.mode == 'shots' else None

    trace = EvolutionTrace()
    print(f"🔄 Evolving {c.n_params} parameters over {cfg.n_steps} steps (dtau={cfg.dtau:.6g}, mode={cfg.mode})")

    for k in range(cfg.n_steps + 1):
        start = time.perf_counter()
        tau = k * cfg.dtau
        if time_dependent and k > 0:
            m = H.at(tau)
            if use_pauli:
                decomposition = pauli_decompose(m)

        if cfg.mode == 'shots':
            system = sampled_system(c, theta, decomposition, cfg.shots, rngs[k])
            lowest = system.min_eigenvalue
        else:
            system = McLachlanSystem(
                A=assemble_A(c, theta),
                C=assemble_C(c, theta, m, path=cfg.hamiltonian_path, decomposition=decomposition,
                             phase_correction=cfg.phase_correction),
            )
            lowest = system.check() if cfg.check_invariants else system.min_eigenvalue

        sol = solve_thetadot(system.A, system.C, cfg.cutoff_ratio, cfg.regularization)
        distance = oracle.distance(k, prepare_state(c, theta)) if oracle is not None else None
        elapsed = time.perf_counter() - start
        trace.records.append(StepRecord(
            step=k,
            tau=tau,
            theta=theta.copy(),
            theta_dot_norm=sol.norm,
            residual=sol.residual,
            oracle_distance=distance,
            wall_time=elapsed,
            rank=sol.rank,
            condition=sol.condition,
            min_eigenvalue=lowest,
            degenerate=sol.degenerate,
        ))
        if audit is not None:
            audit.log_step(k, tau, elapsed, sol.norm, sol.residual, distance)

        if not np.isfinite(sol.norm) or sol.norm > cfg.divergence_limit:
            print(f"❌ Divergence at step {k}: |theta_dot| = {sol.norm:.3e}")
            raise DivergenceError(
                f"|theta_dot| = {sol.norm:.3e} exceeds {cfg.divergence_limit:.1e} at step {k} (tau={tau:.6g})",
                trace=trace,
            )

        if cfg.log_every and k % cfg.log_every == 0:
            extra = f"  distance={distance:.4e}" if distance is not None else ""
            print(f"   step {k:4d}/{cfg.n_steps}  tau={tau:.5f}  |theta_dot|={sol.norm:.3e}  rank={sol.rank}{extra}")

        if k < cfg.n_steps:
            theta = theta + cfg.dtau * sol.value

    trace.completed = True
    degenerate = trace.degenerate_steps()
    if degenerate:
        print(f"⚠️  {len(degenerate)} step(s) had every singular value truncated")
    print(f"✅ Evolution finished at tau={cfg.horizon:.6g}")
    return trace


if __name__ == '__main__':
    from ansatz import Gate

    circuit = AnsatzCircuit(n_qubits=1, gates=(Gate("RY", (1,), 1),))
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    print("📊 A(0) =", assemble_A(circuit, [0.0]))
    print("📊 C(0) =", assemble_C(circuit, [0.0], sigma_x))
    cfg = EvolutionConfig(dtau=0.01, n_steps=100, log_every=25)
    trace = evolve(circuit, [0.0], sigma_x, cfg)
    print("📊 theta(1) =", trace.final_theta)
