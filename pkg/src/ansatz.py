#!/usr/bin/env python3
"""
Parameterised Ansatz Circuit
Builds the layered Ry / controlled-Ry circuit, prepares |phi(theta)> and
differentiates it exactly by generator insertion
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, UsageError
from statevector import (
    MAX_QUBITS,
    GateMatrix,
    StateVector,
    apply_controlled,
    apply_single,
    gate_y,
    gate_z,
    projector_one,
    zero_state,
)

GATE_KINDS = ("H", "X", "RY", "CRY")

# d/dtheta Ry(theta) = -(i/2) Y Ry(theta)
RY_GENERATOR = -0.5j * gate_y()


@dataclass(frozen=True)
class Gate:
    """One circuit element: kind, 1-based qubits (control first for CRY), parameter index"""

    kind: str
    qubits: Tuple[int, ...]
    param: Optional[int] = None


@dataclass(frozen=True)
class GeneratorTerm:
    """
    One scalar x Pauli-product term of a gate derivative

    The derivative of gate k is sum_i coefficient_i * (paulis_i) applied at the gate.
    """

    coefficient: complex
    paulis: Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class DerivativeState:
    k: int
    vector: StateVector
    provenance: str


@dataclass(frozen=True)
class AnsatzCircuit:
    """
    Immutable gate sequence with one parameter per parameterised gate

    Args:
        n_qubits: Register width
        gates: Ordered gates, applied first to last
        n_cells: Number of repeated unit cells (0 for hand-built circuits)
    """

    n_qubits: int
    gates: Tuple[Gate, ...]
    n_cells: int = 0
    _positions: Dict[int, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}]")
        object.__setattr__(self, "gates", tuple(self.gates))

        positions = {}
        for pos, gate in enumerate(self.gates):
            if gate.kind not in GATE_KINDS:
                raise ConfigurationError(f"Unsupported gate kind {gate.kind}")
            expected = 2 if gate.kind == "CRY" else 1
            if len(gate.qubits) != expected:
                raise ConfigurationError(f"{gate.kind} takes {expected} qubit(s), got {gate.qubits}")
            if any(not 1 <= q <= self.n_qubits for q in gate.qubits):
                raise ConfigurationError(f"Gate qubits {gate.qubits} outside register")
            if gate.kind == "CRY" and gate.qubits[0] == gate.qubits[1]:
                raise ConfigurationError("CRY control and target must differ")

            parameterised = gate.kind in ("RY", "CRY")
            if parameterised != (gate.param is not None):
                raise ConfigurationError(f"Gate {gate} parameter binding is inconsistent")
            if gate.param is not None:
                if gate.param in positions:
                    raise ConfigurationError(f"Parameter {gate.param} bound to more than one gate")
                positions[gate.param] = pos

        if sorted(positions) != list(range(1, len(positions) + 1)):
            raise ConfigurationError("Parameter indices must be exactly 1..N")
        self._positions.update(positions)

    @property
    def n_params(self) -> int:
        return len(self._positions)

    @property
    def dimension(self) -> int:
        return 1 << self.n_qubits

    def position_of(self, k: int) -> int:
        """Gate position of parameter k"""
        if k not in self._positions:
            raise UsageError(f"Parameter index {k} outside [1, {self.n_params}]")
        return self._positions[k]

    def generator_terms(self, k: int) -> List[GeneratorTerm]:
        """
        Derivative of gate k as a sum of Pauli-product terms

        Ry on q:          -(i/2) Y_q
        CRy (c -> t):     -(i/2) |1><1|_c Y_t = -(i/4) Y_t + (i/4) Z_c Y_t
        """
        gate = self.gates[self.position_of(k)]
        if gate.kind == "RY":
            return [GeneratorTerm(-0.5j, (("Y", gate.qubits[0]),))]
        control, target = gate.qubits
        return [
            GeneratorTerm(-0.25j, (("Y", target),)),
            GeneratorTerm(0.25j, (("Z", control), ("Y", target))),
        ]

    def to_text(self, header: Optional[Dict] = None) -> str:
        """One gate per line: GATE kind qubits param_index, after optional '# key=value' lines"""
        lines = [f"# {key}={header[key]}" for key in sorted(header or {})]
        lines += [f"# n_qubits={self.n_qubits} n_cells={self.n_cells} n_params={self.n_params}"]
        for gate in self.gates:
            qubits = ",".join(str(q) for q in gate.qubits)
            param = "-" if gate.param is None else str(gate.param)
            lines.append(f"GATE {gate.kind} {qubits} {param}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "AnsatzCircuit":
        n_qubits, n_cells = None, 0
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, value = token.partition("=")
                    if key == 'n_qubits':
                        n_qubits = int(value)
                    elif key == 'n_cells':
                        n_cells = int(value)
                continue
            parts = line.split()
            if len(parts) != 4 or parts[0] != "GATE":
                raise UsageError(f"Malformed gate line: {raw!r}")
            qubits = tuple(int(q) for q in parts[2].split(","))
            param = None if parts[3] == "-" else int(parts[3])
            gates.append(Gate(parts[1], qubits, param))
        if not gates:
            raise UsageError("No GATE lines in circuit text")
        if n_qubits is None:
            n_qubits = max(q for g in gates for q in g.qubits)
        return cls(n_qubits=n_qubits, gates=tuple(gates), n_cells=n_cells)


def build_ansatz(n_qubits: int, n_cells: int) -> AnsatzCircuit:
    """
    Build the layered ansatz

    Entry layer: H on every qubit then X on every qubit (no parameters).
    Then an Ry layer on all qubits, followed by n_cells unit cells, each a
    ladder of controlled Ry gates (1->2, 2->3, ...) and another Ry layer.

    Args:
        n_qubits: Register width, at least 2
        n_cells: Number of unit cells, at least 1

    Returns:
        AnsatzCircuit with n_qubits + n_cells * (2 n_qubits - 1) parameters
    """
    if n_qubits < 2:
        raise ConfigurationError(f"Ansatz needs at least 2 qubits, got {n_qubits}")
    if n_cells < 1:
        raise ConfigurationError(f"Ansatz needs at least one unit cell, got {n_cells}")

    qubits = range(1, n_qubits + 1)
    gates = [Gate("H", (q,)) for q in qubits] + [Gate("X", (q,)) for q in qubits]
    k = 0

    def ry_layer():
        nonlocal k
        for q in qubits:
            k += 1
            gates.append(Gate("RY", (q,), k))

    ry_layer()
    for _ in range(n_cells):
        for q in range(1, n_qubits):
            k += 1
            gates.append(Gate("CRY", (q, q + 1), k))
        ry_layer()

    return AnsatzCircuit(n_qubits=n_qubits, gates=tuple(gates), n_cells=n_cells)


def check_theta(c: AnsatzCircuit, theta: Sequence[float]) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != c.n_params:
        raise UsageError(f"Expected {c.n_params} parameters, got {theta.shape[0]}")
    return theta


def apply_gate(gate: Gate, theta: np.ndarray, s: StateVector, offset: int = 0) -> StateVector:
    """Apply one circuit gate; offset shifts every qubit index (ancilla registers)"""
    qubits = tuple(q + offset for q in gate.qubits)
    if gate.kind in ("H", "X"):
        return apply_single(GateMatrix(gate.kind), qubits[0], s)
    angle = theta[gate.param - 1]
    if gate.kind == "RY":
        return apply_single(GateMatrix("RY", angle), qubits[0], s)
    control, target = qubits
    return apply_controlled(GateMatrix("RY", angle), control, target, s)


def _apply_generator(gate: Gate, s: StateVector) -> StateVector:
    if gate.kind == "RY":
        return apply_single(RY_GENERATOR, gate.qubits[0], s)
    control, target = gate.qubits
    s = apply_single(projector_one(), control, s)
    return apply_single(RY_GENERATOR, target, s)


def prepare_state(c: AnsatzCircuit, theta: Sequence[float]) -> StateVector:
    """
    Run the circuit on |0...0>

    Args:
        c: Ansatz circuit
        theta: Parameter vector of length c.n_params (radians)

    Returns:
        |phi(theta)>, unit norm
    """
    theta = check_theta(c, theta)
    s = zero_state(c.n_qubits)
    for gate in c.gates:
        s = apply_gate(gate, theta, s)
    return s


def derivative_states(c: AnsatzCircuit, theta: Sequence[float]) -> np.ndarray:
    """
    All exact parameter derivatives in one forward pass

    Returns:
        Complex array of shape (n_params, 2^n); row k-1 is d|phi>/d theta^k
    """
    theta = check_theta(c, theta)
    out = np.zeros((c.n_params, c.dimension), dtype=complex)
    s = zero_state(c.n_qubits)
    for pos, gate in enumerate(c.gates):
        s = apply_gate(gate, theta, s)
        if gate.param is None:
            continue
        d = _apply_generator(gate, s)
        for later in c.gates[pos + 1:]:
            d = apply_gate(later, theta, d)
        out[gate.param - 1] = d
    return out


def derivative_state(c: AnsatzCircuit, theta: Sequence[float], k: int) -> DerivativeState:
    """
    Exact d|phi(theta)>/d theta^k by inserting the gate generator

    Args:
        c: Ansatz circuit
        theta: Parameter vector
        k: Parameter index, 1-based

    Returns:
        DerivativeState with provenance 'generator-insertion'
    """
    theta = check_theta(c, theta)
    target_pos = c.position_of(k)
    s = zero_state(c.n_qubits)
    for pos, gate in enumerate(c.gates):
        s = apply_gate(gate, theta, s)
        if pos == target_pos:
            s = _apply_generator(gate, s)
    return DerivativeState(k=k, vector=s, provenance="generator-insertion")


def derivative_state_fd(c: AnsatzCircuit, theta: Sequence[float], k: int, h: float = 1e-5) -> DerivativeState:
    """Central finite difference (|phi(theta + h e_k)> - |phi(theta - h e_k)>) / 2h"""
    if h <= 0:
        raise UsageError(f"Finite-difference step must be positive, got {h}")
    theta = check_theta(c, theta)
    c.position_of(k)
    step = np.zeros_like(theta)
    step[k - 1] = h
    diff = prepare_state(c, theta + step) - prepare_state(c, theta - step)
    return DerivativeState(k=k, vector=diff / (2.0 * h), provenance="finite-difference")


PAULI_OPERATORS = {"Y": gate_y(), "Z": gate_z()}


@dataclass
class TermStates:
    """
    Circuit states with one generator Pauli product inserted

    Row a of `vectors` is the circuit with the Pauli product of term a applied
    after gate `owners[a]`; scaling it by `coefficients[a]` and summing the
    rows of one owner gives that parameter's derivative state.
    """

    owners: np.ndarray
    positions: np.ndarray
    coefficients: np.ndarray
    paulis: List[Tuple[Tuple[str, int], ...]]
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.owners)


def generator_term_states(c: AnsatzCircuit, theta: Sequence[float]) -> TermStates:
    """
    All unitary term states Phi~_{k,i}|0> in one forward pass

    Args:
        c: Ansatz circuit
        theta: Parameter vector

    Returns:
        TermStates ordered by parameter index, then by term
    """
    theta = check_theta(c, theta)
    owners, positions, coefficients, paulis, vectors = [], [], [], [], []
    s = zero_state(c.n_qubits)
    for pos, gate in enumerate(c.gates):
        s = apply_gate(gate, theta, s)
        if gate.param is None:
            continue
        for term in c.generator_terms(gate.param):
            d = s
            for ch, q in term.paulis:
                d = apply_single(PAULI_OPERATORS[ch], q, d)
            for later in c.gates[pos + 1:]:
                d = apply_gate(later, theta, d)
            owners.append(gate.param)
            positions.append(pos)
            coefficients.append(term.coefficient)
            paulis.append(term.paulis)
            vectors.append(d)

    order = np.argsort(owners, kind="stable")
    return TermStates(
        owners=np.asarray(owners)[order],
        positions=np.asarray(positions)[order],
        coefficients=np.asarray(coefficients, dtype=complex)[order],
        paulis=[paulis[i] for i in order],
        vectors=np.asarray(vectors)[order],
    )


def _rotate_axis(psi: np.ndarray, axis: int, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
    """Apply per-sample Ry on one qubit axis of a batched real state"""
    i0 = [slice(None)] * psi.ndim
    i1 = list(i0)
    i0[axis], i1[axis] = 0, 1
    a0, a1 = psi[tuple(i0)], psi[tuple(i1)]
    shape = (-1,) + (1,) * (a0.ndim - 1)
    c, s = cos.reshape(shape), sin.reshape(shape)
    out = np.empty_like(psi)
    out[tuple(i0)] = c * a0 - s * a1
    out[tuple(i1)] = s * a0 + c * a1
    return out


def prepare_states_batch(c: AnsatzCircuit, thetas: np.ndarray) -> np.ndarray:
    """
    Prepare many states at once (real arithmetic, the gate set is real)

    Args:
        c: Ansatz circuit
        thetas: Array of shape (S, n_params)

    Returns:
        Real array of shape (S, 2^n)
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != c.n_params:
        raise UsageError(f"Expected {c.n_params} parameters per row, got {thetas.shape[1]}")
    n_samples, n = thetas.shape[0], c.n_qubits
    psi = np.zeros((n_samples,) + (2,) * n)
    psi[(slice(None),) + (0,) * n] = 1.0
    inv_sqrt2 = 1.0 / np.sqrt(2.0)

    for gate in c.gates:
        if gate.kind == "H":
            axis = gate.qubits[0]
            a0 = np.take(psi, 0, axis=axis)
            a1 = np.take(psi, 1, axis=axis)
            psi = np.stack([(a0 + a1) * inv_sqrt2, (a0 - a1) * inv_sqrt2], axis=axis)
        elif gate.kind == "X":
            psi = np.flip(psi, axis=gate.qubits[0])
        else:
            half = thetas[:, gate.param - 1] / 2.0
            cos, sin = np.cos(half), np.sin(half)
            if gate.kind == "RY":
                psi = _rotate_axis(psi, gate.qubits[0], cos, sin)
            else:
                control, target = gate.qubits
                index = [slice(None)] * psi.ndim
                index[control] = 1
                index = tuple(index)
                axis = target if target < control else target - 1
                psi = psi.copy()
                psi[index] = _rotate_axis(psi[index], axis, cos, sin)
    return psi.reshape(n_samples, -1)
