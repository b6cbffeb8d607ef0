#!/usr/bin/env python3
"""
Classical Ground Truth
Exact normalised imaginary-time evolution, explicit finite-difference paths,
the Black-Scholes closed form and boundary-anchored rescaling to prices
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh, expm
from scipy.stats import norm

from errors import AnchoringError, ExtrapolationError, NumericalError, UsageError
from hamiltonian import HamiltonianSpec, SpaceGrid, TransformConstants, q_of_t
from statevector import StateVector

HamiltonianLike = Union[np.ndarray, HamiltonianSpec, Callable[[float], np.ndarray]]

# largest exponent growth allowed per expm factor before renormalising
MAX_LOG_GROWTH = 20.0


def _matrix(H) -> np.ndarray:
    return H.matrix if isinstance(H, HamiltonianSpec) else np.asarray(H)


def _evaluator(H: HamiltonianLike) -> Callable[[float], np.ndarray]:
    if isinstance(H, HamiltonianSpec):
        return H.at
    if callable(H):
        return H
    matrix = np.asarray(H)
    return lambda tau: matrix


def _check_unit(psi: np.ndarray, what: str = "state"):
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise UsageError(f"{what} must have unit norm, got {nrm:.12g}")


def exact_imaginary_evolution(H, psi0: StateVector, tau: float) -> StateVector:
    """
    Normalised e^{H tau} psi0

    Symmetric H goes through an eigendecomposition with log-shifted weights;
    anything else uses scipy's expm in increments small enough not to overflow.

    Args:
        H: Dense Hamiltonian (array or HamiltonianSpec)
        psi0: Unit-norm initial state
        tau: Scaled time

    Returns:
        Unit-norm evolved state
    """
    m = _matrix(H)
    psi = np.asarray(psi0, dtype=complex)
    if m.shape != (psi.shape[0], psi.shape[0]):
        raise UsageError(f"Hamiltonian {m.shape} does not act on a state of length {psi.shape[0]}")
    _check_unit(psi, "psi0")
    if tau == 0:
        return psi.copy()

    if np.allclose(m, m.T, atol=1e-12, rtol=0.0):
        w, v = eigh(m)
        exponents = w * tau
        out = v @ (np.exp(exponents - exponents.max()) * (v.conj().T @ psi))
        return out / np.linalg.norm(out)

    growth = abs(tau) * np.linalg.norm(m, 1)
    n_chunks = max(1, int(np.ceil(growth / MAX_LOG_GROWTH)))
    step = expm(m * (tau / n_chunks))
    out = psi
    for _ in range(n_chunks):
        out = step @ out
        out = out / np.linalg.norm(out)
    return out


def normalization_constant(H, psi0: StateVector, tau: float) -> float:
    """
    gamma(tau) = <psi0| e^{2 H tau} |psi0>^{-1/2}

    Equals 1 / ||e^{H tau} psi0|| when H is symmetric.
    """
    m = _matrix(H)
    psi = np.asarray(psi0, dtype=complex)
    if m.shape != (psi.shape[0], psi.shape[0]):
        raise UsageError(f"Hamiltonian {m.shape} does not act on a state of length {psi.shape[0]}")

    # e^{2 tau H} psi in renormalised chunks; log_growth keeps the dropped norms
    n_chunks = max(1, int(np.ceil(2.0 * abs(tau) * np.linalg.norm(m, 1) / MAX_LOG_GROWTH)))
    step = expm(m * (2.0 * tau / n_chunks))
    v, log_growth = psi, 0.0
    for _ in range(n_chunks):
        v = step @ v
        nrm = np.linalg.norm(v)
        v = v / nrm
        log_growth += np.log(nrm)

    overlap = np.vdot(psi, v).real
    if overlap <= 0:
        raise NumericalError(f"<psi0|exp(2 tau H)|psi0> is not positive ({overlap:.3e})")
    return float(np.exp(-0.5 * (log_growth + np.log(overlap))))


@dataclass
class ReferenceTrajectory:
    """
    Classical reference path on a scaled-time grid

    states are unit norm; log_norms accumulate log ||e^{H dtau} psi_k|| so the
    unnormalised solution is exp(log_norms) * states * initial_scale.
    """

    taus: np.ndarray
    states: np.ndarray
    log_norms: np.ndarray
    initial_scale: float = 1.0

    def __len__(self) -> int:
        return len(self.taus)

    def unnormalized(self) -> np.ndarray:
        return self.initial_scale * np.exp(self.log_norms)[:, None] * self.states

    def distance(self, k: int, phi: StateVector) -> float:
        return float(np.linalg.norm(self.states[k] - np.asarray(phi)))

    def to_csv(self, path: str, header: Optional[Dict] = None):
        """step,tau,psi_1..psi_D with the same '#' header block as the evolution trace"""
        cols = {'step': np.arange(len(self.taus)), 'tau': self.taus}
        for i in range(self.states.shape[1]):
            cols[f"psi_{i + 1}"] = self.states[:, i].real
        write_csv_with_header(pd.DataFrame(cols), path, header)


def _check_tau_grid(taus: Sequence[float]) -> np.ndarray:
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or len(taus) < 1 or abs(taus[0]) > 1e-15 or np.any(np.diff(taus) <= 0):
        raise UsageError("tau grid must start at 0 and increase strictly")
    return taus


def exact_imaginary_evolution_td(H: HamiltonianLike, psi0: StateVector,
                                 taus: Sequence[float], initial_scale: float = 1.0) -> ReferenceTrajectory:
    """
    Frozen-Hamiltonian product psi_{k+1} ~ expm(H(tau_k) dtau_k) psi_k

    Left-point freezing matches the variational Euler march, so comparisons
    isolate ansatz error from time-discretisation error.

    Args:
        H: Constant matrix, HamiltonianSpec or callable tau -> matrix
        psi0: Unit-norm initial state
        taus: Increasing scaled-time grid starting at 0
        initial_scale: Norm of the unnormalised initial condition

    Returns:
        ReferenceTrajectory with one state per grid point
    """
    taus = _check_tau_grid(taus)
    psi = np.asarray(psi0, dtype=complex)
    _check_unit(psi, "psi0")
    at = _evaluator(H)

    states = np.zeros((len(taus), psi.shape[0]), dtype=complex)
    log_norms = np.zeros(len(taus))
    states[0] = psi
    for k in range(len(taus) - 1):
        v = expm(at(taus[k]) * (taus[k + 1] - taus[k])) @ states[k]
        nrm = np.linalg.norm(v)
        states[k + 1] = v / nrm
        log_norms[k + 1] = log_norms[k] + np.log(nrm)
    return ReferenceTrajectory(taus=taus, states=states, log_norms=log_norms, initial_scale=initial_scale)


def explicit_fd_evolution(H: HamiltonianLike, u0: StateVector, taus: Sequence[float]) -> np.ndarray:
    """Unnormalised explicit scheme u_{k+1} = (I + dtau H(tau_k)) u_k"""
    taus = _check_tau_grid(taus)
    at = _evaluator(H)
    u = np.zeros((len(taus), len(u0)))
    u[0] = np.real(u0)
    for k in range(len(taus) - 1):
        dt = taus[k + 1] - taus[k]
        u[k + 1] = u[k] + dt * (at(taus[k]) @ u[k])
    return u


def black_scholes_call(S: float, K: float, sigma: float, r: float, T: float) -> float:
    """
    Black-Scholes European call

    Args:
        S: Spot
        K: Strike
        sigma: Volatility
        r: Rate
        T: Maturity in years

    Returns:
        S N(d1) - K e^{-rT} N(d2)
    """
    if min(S, K, sigma, T) <= 0:
        raise UsageError(f"S, K, sigma and T must be positive: S={S}, K={K}, sigma={sigma}, T={T}")
    vol = sigma * np.sqrt(T)
    d1 = (np.log(S / K) + (r + 0.5 * sigma ** 2) * T) / vol
    d2 = d1 - vol
    return float(S * norm.cdf(d1) - K * np.exp(-r * T) * norm.cdf(d2))


@dataclass
class PriceCurve:
    """Option values on the underlying-price grid"""

    spots: np.ndarray
    prices: np.ndarray

    def price_at(self, spot: float) -> float:
        """Linear interpolation in log-price"""
        if not self.spots[0] <= spot <= self.spots[-1]:
            raise ExtrapolationError(f"Spot {spot} outside grid [{self.spots[0]}, {self.spots[-1]}]")
        return float(np.interp(np.log(spot), np.log(self.spots), self.prices))


def _anchor_amplitude(phi: StateVector) -> float:
    last = float(np.real(np.asarray(phi)[-1]))
    if abs(last) < 1e-12:
        raise AnchoringError(f"Boundary amplitude {last:.3e} too small to anchor the scale")
    return last


def rescale_to_price_european(phi: StateVector, tau: float, grid: SpaceGrid,
                              consts: TransformConstants, K: float) -> PriceCurve:
    """
    Recover V(t, S) from a normalised heat-equation state

    The scale is fixed by the deep in-the-money boundary
    V(t, S_max) = S_max - K e^{-r (T - t)}.

    Args:
        phi: Unit-norm state on the log-price grid
        tau: Scaled time of the state
        grid: Log-price grid
        consts: Change-of-variable constants
        K: Strike

    Returns:
        PriceCurve on S_i = e^{x_i}
    """
    _check_unit(np.asarray(phi), "phi")
    x = grid.values
    t = consts.calendar_time(tau)
    s_max = float(np.exp(grid.v_max))
    v_max = s_max - K * np.exp(-consts.r * (consts.T - t))
    u_max = np.exp(-consts.a * grid.v_max) * v_max

    scale = u_max / _anchor_amplitude(phi)
    prices = np.exp(consts.a * x) * scale * np.real(np.asarray(phi))
    return PriceCurve(spots=np.exp(x), prices=prices)


@dataclass
class AsianPrice:
    """Q curve on the Vecer grid plus the price at inception"""

    y: np.ndarray
    Q: np.ndarray
    price: float
    Y0: float


def rescale_to_price_asian(phi: StateVector, tau: float, grid_y: SpaceGrid, S0: float,
                           K: float, r: float, T: float, interpolation: str = "linear") -> AsianPrice:
    """
    Recover Q(tau, y) and the Asian call price S0 Q(tau, Y0)

    The null boundary rows freeze Q at y_max, so Q(tau, y_max) = max(y_max, 0).

    Args:
        phi: Unit-norm state on the Vecer grid
        tau: Scaled time of the state (sigma^2 T for inception); the anchor does not depend on it
        grid_y: Vecer-variable grid
        S0: Spot at inception
        K: Strike
        r: Rate
        T: Maturity
        interpolation: 'linear' or 'cubic'

    Returns:
        AsianPrice
    """
    _check_unit(np.asarray(phi), "phi")
    y = grid_y.values
    scale = max(grid_y.v_max, 0.0) / _anchor_amplitude(phi)
    Q = scale * np.real(np.asarray(phi))

    Y0 = (q_of_t(0.0, r, T) * S0 - K * np.exp(-r * T)) / S0
    if not grid_y.v_min <= Y0 <= grid_y.v_max:
        raise ExtrapolationError(f"Y0={Y0:.6f} outside [{grid_y.v_min}, {grid_y.v_max}]")
    if interpolation == 'linear':
        q0 = float(np.interp(Y0, y, Q))
    elif interpolation == 'cubic':
        q0 = float(CubicSpline(y, Q)(Y0))
    else:
        raise UsageError(f"Unknown interpolation {interpolation!r}")
    return AsianPrice(y=y, Q=Q, price=S0 * q0, Y0=float(Y0))


def write_csv_with_header(df: pd.DataFrame, path: str, header: Optional[Dict] = None,
                          float_format: str = "%.12g"):
    """CSV preceded by '# key=value' lines, keys sorted for reproducible output"""
    with open(path, "w", newline="") as f:
        for key in sorted(header or {}):
            f.write(f"# {key}={header[key]}\n")
        df.to_csv(f, index=False, float_format=float_format)
