#!/usr/bin/env python3
"""
Discretised Pricing Hamiltonians
Heat-equation form for European calls, time-dependent Vecer form for
fixed-strike arithmetic Asian calls, and Pauli-string decomposition
"""

from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from errors import ConfigurationError, UsageError
from statevector import StateVector, apply_single, gate_identity, gate_x, gate_y, gate_z, n_qubits_of

PAULI_MATRICES = {"I": gate_identity(), "X": gate_x(), "Y": gate_y(), "Z": gate_z()}
DROP_TOLERANCE = 1e-12
MAX_PAULI_QUBITS = 6
TIME_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpaceGrid:
    """
    Equidistant grid of 2^n points

    values are log-prices x for European problems and the Vecer variable y
    for Asian problems.
    """

    v_min: float
    v_max: float
    n_points: int
    kind: str = "generic"

    def __post_init__(self):
        if self.n_points < 2 or self.n_points & (self.n_points - 1):
            raise ConfigurationError(f"Grid size must be a power of two >= 2, got {self.n_points}")
        if not self.v_max > self.v_min:
            raise ConfigurationError(f"Grid step must be positive: [{self.v_min}, {self.v_max}]")

    @classmethod
    def european(cls, s_min: float, s_max: float, n_qubits: int = 4) -> "SpaceGrid":
        if s_min <= 0 or s_max <= 0:
            raise ConfigurationError("Price bounds must be positive")
        return cls(float(np.log(s_min)), float(np.log(s_max)), 1 << n_qubits, "log_price")

    @classmethod
    def asian(cls, y_min: float, y_max: float, n_qubits: int = 4) -> "SpaceGrid":
        return cls(float(y_min), float(y_max), 1 << n_qubits, "vecer")

    @property
    def n_qubits(self) -> int:
        return self.n_points.bit_length() - 1

    @property
    def delta(self) -> float:
        return (self.v_max - self.v_min) / (self.n_points - 1)

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.n_points)


@dataclass(frozen=True)
class TransformConstants:
    """
    Black-Scholes to heat-equation change-of-variable constants

    Args:
        sigma: Volatility (1/sqrt(year))
        r: Risk-free rate (1/year)
        T: Maturity (years)
    """

    sigma: float
    r: float
    T: float

    def __post_init__(self):
        if self.sigma <= 0 or self.T <= 0:
            raise ConfigurationError(f"sigma and T must be positive, got sigma={self.sigma}, T={self.T}")

    @property
    def a(self) -> float:
        return 0.5 - self.r / self.sigma ** 2

    @property
    def b(self) -> float:
        s2 = self.sigma ** 2
        return (0.5 - 4.0 * self.r / (2.0 * s2) - s2 - 2.0 * self.r) / (4.0 * s2)

    @property
    def tau_max(self) -> float:
        """Scaled time horizon sigma^2 T"""
        return self.sigma ** 2 * self.T

    def calendar_time(self, tau: float) -> float:
        """t = T - tau / sigma^2"""
        return self.T - tau / self.sigma ** 2


@dataclass
class HamiltonianSpec:
    """
    Dense real Hamiltonian, optionally with a scaled-time evaluator

    For time-dependent problems `matrix` is the value at `tau` and
    `evaluator(tau)` rebuilds it at any other scaled time.
    """

    matrix: np.ndarray
    time_dependent: bool = False
    evaluator: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False)
    tau: float = 0.0

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def at(self, tau: float) -> np.ndarray:
        if self.time_dependent and self.evaluator is not None and abs(tau - self.tau) > TIME_TOLERANCE:
            return self.evaluator(tau)
        return self.matrix

    def to_csv(self, path: str):
        """Dense export for inspection"""
        pd.DataFrame(self.matrix).to_csv(path, index=False, header=False)


def european_hamiltonian(grid: SpaceGrid, consts: TransformConstants) -> HamiltonianSpec:
    """
    Second-order finite-difference 1/2 d_xx on the log-price grid

    Args:
        grid: Log-price grid from ln(S_min) to ln(S_max)
        consts: Change-of-variable constants; b sets the boundary rows

    Returns:
        Time-independent HamiltonianSpec
    """
    n, dx = grid.n_points, grid.delta
    if dx <= 0:
        raise ConfigurationError("Non-positive grid step")
    off, diag = 1.0 / (2.0 * dx ** 2), -1.0 / dx ** 2

    m = np.zeros((n, n))
    rows = np.arange(1, n - 1)
    m[rows, rows - 1] = off
    m[rows, rows] = diag
    m[rows, rows + 1] = off
    m[0, 0] = -consts.b
    m[n - 1, n - 1] = -consts.b
    return HamiltonianSpec(matrix=m)


def q_of_t(t: float, r: float, T: float) -> float:
    """
    Vecer q(t): (1 - exp(-r (T - t))) / (r T), or 1 - t/T when r = 0

    Args:
        t: Calendar time in [0, T]
        r: Risk-free rate
        T: Maturity
    """
    if not -TIME_TOLERANCE <= t <= T + TIME_TOLERANCE:
        raise UsageError(f"t={t} outside [0, {T}]")
    t = min(max(t, 0.0), T)
    if r == 0:
        return 1.0 - t / T
    return float(-np.expm1(-r * (T - t)) / (r * T))


def _asian_matrix(grid: SpaceGrid, tau: float, consts: TransformConstants) -> np.ndarray:
    if not -TIME_TOLERANCE <= tau <= consts.tau_max + TIME_TOLERANCE:
        raise UsageError(f"tau={tau} outside [0, {consts.tau_max}]")
    q = q_of_t(consts.calendar_time(tau), consts.r, consts.T)
    n, dy = grid.n_points, grid.delta
    coeff = (q - grid.values) ** 2 / dy ** 2

    m = np.zeros((n, n))
    rows = np.arange(1, n - 1)
    m[rows, rows - 1] = coeff[rows] / 2.0
    m[rows, rows] = -coeff[rows]
    m[rows, rows + 1] = coeff[rows] / 2.0
    return m


def asian_hamiltonian(grid: SpaceGrid, tau: float, consts: TransformConstants) -> HamiltonianSpec:
    """
    Vecer operator (q - y)^2 / 2 d_yy with null boundary rows

    q is evaluated at calendar time t = T - tau / sigma^2.

    Args:
        grid: Vecer-variable grid
        tau: Scaled time in [0, sigma^2 T]
        consts: Change-of-variable constants

    Returns:
        Time-dependent HamiltonianSpec frozen at tau
    """
    return HamiltonianSpec(
        matrix=_asian_matrix(grid, tau, consts),
        time_dependent=True,
        evaluator=lambda s: _asian_matrix(grid, s, consts),
        tau=tau,
    )


@dataclass
class PauliDecomposition:
    """Sum of coefficient x Pauli-string terms; coefficients may be complex"""

    n_qubits: int
    terms: List[Tuple[str, complex]]

    def to_lines(self) -> str:
        """STRING coefficient_re coefficient_im per line"""
        return "".join(f"{label} {c.real:.17g} {c.imag:.17g}\n" for label, c in self.terms)

    def save(self, path: str):
        with open(path, "w") as f:
            f.write(self.to_lines())


def pauli_string_matrix(label: str) -> np.ndarray:
    try:
        return reduce(np.kron, [PAULI_MATRICES[ch] for ch in label])
    except KeyError as e:
        raise UsageError(f"Invalid Pauli label {label!r}") from e


def pauli_decompose(M: np.ndarray, symmetrize: bool = False,
                    tol: float = DROP_TOLERANCE) -> PauliDecomposition:
    """
    Trace-method decomposition lambda_P = Tr(P M) / 2^n over all 4^n strings

    Args:
        M: Square matrix of size 2^n, n <= 6
        symmetrize: Decompose (M + M^T) / 2 instead of M
        tol: Terms with |lambda| below tol are dropped

    Returns:
        PauliDecomposition that reconstructs M exactly (up to dropped terms)
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise UsageError(f"Expected a square matrix, got shape {M.shape}")
    dim = M.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise UsageError(f"Matrix size {dim} is not a power of two")
    if n > MAX_PAULI_QUBITS:
        raise UsageError(f"Pauli decomposition limited to {MAX_PAULI_QUBITS} qubits")
    if symmetrize:
        M = 0.5 * (M + M.T)

    terms = []
    for letters in product("IXYZ", repeat=n):
        label = "".join(letters)
        coeff = complex(np.trace(pauli_string_matrix(label) @ M) / dim)
        if abs(coeff) >= tol:
            terms.append((label, coeff))
    return PauliDecomposition(n_qubits=n, terms=terms)


def pauli_reconstruct(d: PauliDecomposition) -> np.ndarray:
    """Sum of lambda_i h_i as explicit Kronecker products"""
    dim = 1 << d.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for label, coeff in d.terms:
        if len(label) != d.n_qubits:
            raise UsageError(f"Pauli label {label!r} does not match {d.n_qubits} qubits")
        out += coeff * pauli_string_matrix(label)
    return out


def apply_pauli_string(label: str, s: StateVector) -> StateVector:
    """Apply a Pauli string (character i acts on qubit i + 1)"""
    if len(label) != n_qubits_of(s):
        raise UsageError(f"Pauli label {label!r} does not match the state")
    out = np.asarray(s, dtype=complex)
    for q, ch in enumerate(label, start=1):
        if ch == "I":
            continue
        if ch not in PAULI_MATRICES:
            raise UsageError(f"Invalid Pauli label {label!r}")
        out = apply_single(PAULI_MATRICES[ch], q, out)
    return out
