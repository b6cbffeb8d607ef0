#!/usr/bin/env python3
"""
Minimal Statevector Simulator
Dense complex amplitudes, gate matrices and gate application on n qubits

Qubit 1 is the most significant bit of the basis label, so basis index 0 is
|00...0> and index 2^n - 1 is |11...1>. Operators are composed in the order
qubit 1 (x) qubit 2 (x) ... (x) qubit n.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Optional, Union

import numpy as np

from errors import ConfigurationError, UsageError

MAX_QUBITS = 12

StateVector = np.ndarray
Matrix = np.ndarray


def gate_identity() -> Matrix:
    return np.eye(2, dtype=complex)


def gate_x() -> Matrix:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def gate_y() -> Matrix:
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def gate_z() -> Matrix:
    return np.array([[1, 0], [0, -1]], dtype=complex)


def gate_h() -> Matrix:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def gate_s_dagger() -> Matrix:
    return np.array([[1, 0], [0, -1j]], dtype=complex)


def projector_one() -> Matrix:
    """|1><1| on a single qubit"""
    return np.array([[0, 0], [0, 1]], dtype=complex)


def gate_ry(theta: float) -> Matrix:
    """
    Rotation about the Y axis

    Args:
        theta: Rotation angle in radians

    Returns:
        2x2 complex matrix [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_cry(theta: float) -> Matrix:
    """4x4 controlled Ry with the control on the first (most significant) qubit"""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = gate_identity()
    out[2:, 2:] = gate_ry(theta)
    return out


_FIXED_GATES = {
    "I": gate_identity,
    "X": gate_x,
    "Y": gate_y,
    "Z": gate_z,
    "H": gate_h,
}


@dataclass(frozen=True)
class GateMatrix:
    """
    A named gate with its explicit matrix

    kind is one of I, X, Y, Z, H, RY, CRY; theta is only used by RY and CRY.
    """

    kind: str
    theta: Optional[float] = None

    @property
    def matrix(self) -> Matrix:
        if self.kind in _FIXED_GATES:
            return _FIXED_GATES[self.kind]()
        if self.kind == "RY":
            return gate_ry(self._angle())
        if self.kind == "CRY":
            return gate_cry(self._angle())
        raise UsageError(f"Unknown gate kind: {self.kind}")

    def _angle(self) -> float:
        if self.theta is None:
            raise UsageError(f"Gate {self.kind} needs an angle")
        return float(self.theta)

    def is_unitary(self, atol: float = 1e-12) -> bool:
        m = self.matrix
        return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol))


GateLike = Union[GateMatrix, np.ndarray]


def _as_matrix(g: GateLike) -> Matrix:
    return g.matrix if isinstance(g, GateMatrix) else np.asarray(g, dtype=complex)


def n_qubits_of(s: StateVector) -> int:
    """Number of qubits implied by the state length"""
    dim = int(np.asarray(s).shape[-1])
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise UsageError(f"State length {dim} is not a power of two")
    return n


def _check_qubit(q: int, n: int):
    if not 1 <= q <= n:
        raise UsageError(f"Qubit index {q} outside [1, {n}]")


def zero_state(n_qubits: int) -> StateVector:
    """
    Prepare |0...0>

    Args:
        n_qubits: Number of qubits, 1..12

    Returns:
        Complex vector of length 2^n with a single 1 at index 0
    """
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    s = np.zeros(1 << int(n_qubits), dtype=complex)
    s[0] = 1.0
    return s


def apply_single(g: GateLike, q: int, s: StateVector) -> StateVector:
    """
    Apply a 2x2 operator to one qubit

    Args:
        g: 2x2 operator (need not be unitary)
        q: Target qubit, 1-based, qubit 1 most significant
        s: Input state

    Returns:
        New state (I (x) ... (x) g (x) ... (x) I) s
    """
    m = _as_matrix(g)
    if m.shape != (2, 2):
        raise UsageError(f"Single-qubit operator must be 2x2, got {m.shape}")
    n = n_qubits_of(s)
    _check_qubit(q, n)
    psi = np.asarray(s, dtype=complex).reshape((2,) * n)
    psi = np.tensordot(m, psi, axes=([1], [q - 1]))
    return np.moveaxis(psi, 0, q - 1).reshape(-1)


def apply_controlled(g: GateLike, control: int, target: int, s: StateVector) -> StateVector:
    """
    Apply g to target on the subspace where control is |1>

    Args:
        g: 2x2 operator for the target
        control: Control qubit, 1-based
        target: Target qubit, 1-based, distinct from control
        s: Input state

    Returns:
        New state with the control-|0> half untouched
    """
    if control == target:
        raise UsageError("control and target must differ")
    m = _as_matrix(g)
    if m.shape != (2, 2):
        raise UsageError(f"Controlled operator must be 2x2, got {m.shape}")
    n = n_qubits_of(s)
    _check_qubit(control, n)
    _check_qubit(target, n)

    psi = np.array(s, dtype=complex).reshape((2,) * n)
    index = [slice(None)] * n
    index[control - 1] = 1
    index = tuple(index)
    # axis of the target once the control axis is sliced away
    axis = target - 1 if target < control else target - 2
    sub = np.tensordot(m, psi[index], axes=([1], [axis]))
    psi[index] = np.moveaxis(sub, 0, axis)
    return psi.reshape(-1)


def apply_dense(M: Matrix, s: StateVector) -> StateVector:
    """Multiply a state by an explicit 2^n x 2^n matrix"""
    m = np.asarray(M)
    v = np.asarray(s)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[1] != v.shape[0]:
        raise UsageError(f"Matrix {m.shape} does not act on a state of length {v.shape[0]}")
    return (m @ v).astype(complex)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in a"""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise UsageError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def expectation_z(q: int, s: StateVector) -> float:
    """<Z_q> for a (normalised) state"""
    n = n_qubits_of(s)
    _check_qubit(q, n)
    probs = np.abs(np.asarray(s).reshape((2,) * n)) ** 2
    p = np.moveaxis(probs, q - 1, 0).reshape(2, -1).sum(axis=1)
    return float(p[0] - p[1])


def kron_operator(g: GateLike, q: int, n_qubits: int) -> Matrix:
    """Explicit I (x) ... (x) g (x) ... (x) I with g at qubit q"""
    _check_qubit(q, n_qubits)
    factors = [gate_identity()] * n_qubits
    factors[q - 1] = _as_matrix(g)
    return reduce(np.kron, factors)


def controlled_operator(g: GateLike, control: int, target: int, n_qubits: int) -> Matrix:
    """Explicit |0><0|_c (x) I + |1><1|_c (x) g_t"""
    if control == target:
        raise UsageError("control and target must differ")
    p1 = projector_one()
    p0 = gate_identity() - p1
    off = kron_operator(p0, control, n_qubits)
    on = kron_operator(p1, control, n_qubits) @ kron_operator(g, target, n_qubits)
    return off + on
