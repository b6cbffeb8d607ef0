"""Known-state tests for the statevector simulator"""

import numpy as np
import pytest

from errors import ConfigurationError, UsageError
from statevector import (
    GateMatrix,
    apply_controlled,
    apply_dense,
    apply_single,
    controlled_operator,
    expectation_z,
    gate_cry,
    gate_h,
    gate_ry,
    gate_x,
    gate_y,
    inner_product,
    kron_operator,
    n_qubits_of,
    zero_state,
)

S2 = 1.0 / np.sqrt(2.0)


def _random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def test_zero_state():
    s = zero_state(3)
    assert s.shape == (8,)
    assert s[0] == 1.0
    assert abs(np.linalg.norm(s) - 1.0) < 1e-15


@pytest.mark.parametrize("n", [0, 13, -1])
def test_zero_state_rejects_width(n):
    with pytest.raises(ConfigurationError):
        zero_state(n)


def test_qubit_one_is_most_significant():
    s = apply_single(gate_x(), 1, zero_state(2))
    np.testing.assert_allclose(s, [0, 0, 1, 0], atol=1e-15)
    s = apply_single(gate_x(), 2, zero_state(2))
    np.testing.assert_allclose(s, [0, 1, 0, 0], atol=1e-15)


def test_bell_state():
    s = apply_single(gate_h(), 1, zero_state(2))
    s = apply_controlled(gate_x(), 1, 2, s)
    np.testing.assert_allclose(s, [S2, 0, 0, S2], atol=1e-12)


def test_controlled_acts_only_on_control_one():
    s = apply_controlled(gate_x(), 1, 2, zero_state(2))
    np.testing.assert_allclose(s, zero_state(2), atol=1e-15)
    flipped = apply_controlled(gate_x(), 1, 2, np.array([0, 0, 1, 0], dtype=complex))
    np.testing.assert_allclose(flipped, [0, 0, 0, 1], atol=1e-15)


@pytest.mark.parametrize("control,target", [(1, 3), (3, 1), (2, 3), (3, 2)])
def test_controlled_matches_dense(rng, control, target):
    s = _random_state(rng, 3)
    g = gate_ry(0.7)
    expected = controlled_operator(g, control, target, 3) @ s
    np.testing.assert_allclose(apply_controlled(g, control, target, s), expected, atol=1e-12)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_single_matches_dense(rng, q):
    s = _random_state(rng, 3)
    g = gate_ry(-1.3)
    np.testing.assert_allclose(apply_single(g, q, s), kron_operator(g, q, 3) @ s, atol=1e-12)


def test_ry_convention():
    theta = 0.9
    np.testing.assert_allclose(gate_ry(theta) @ [1, 0], [np.cos(theta / 2), np.sin(theta / 2)], atol=1e-15)


def test_gate_matrix():
    assert GateMatrix("RY", 0.3).is_unitary()
    assert GateMatrix("CRY", 1.1).matrix.shape == (4, 4)
    with pytest.raises(UsageError):
        GateMatrix("RY").matrix
    with pytest.raises(UsageError):
        GateMatrix("T").matrix


def test_expectation_z():
    assert expectation_z(1, zero_state(1)) == pytest.approx(1.0)
    assert expectation_z(1, apply_single(gate_x(), 1, zero_state(1))) == pytest.approx(-1.0)
    assert expectation_z(1, apply_single(gate_h(), 1, zero_state(1))) == pytest.approx(0.0, abs=1e-12)
    # qubit 2 of |10> is still |0>
    assert expectation_z(2, np.array([0, 0, 1, 0], dtype=complex)) == pytest.approx(1.0)


def test_usage_errors():
    s = zero_state(2)
    with pytest.raises(UsageError):
        apply_single(gate_x(), 3, s)
    with pytest.raises(UsageError):
        apply_single(np.eye(4), 1, s)
    with pytest.raises(UsageError):
        apply_controlled(gate_x(), 2, 2, s)
    with pytest.raises(UsageError):
        inner_product(s, zero_state(3))
    with pytest.raises(UsageError):
        apply_dense(np.eye(8), s)
    with pytest.raises(UsageError):
        n_qubits_of(np.zeros(3))


def test_inner_product_is_conjugate_linear():
    a = np.array([1j, 0])
    b = np.array([1, 0])
    assert inner_product(a, b) == pytest.approx(-1j)


def test_known_rotations():
    np.testing.assert_allclose(apply_single(gate_ry(np.pi), 1, zero_state(1)), [0, 1], atol=1e-12)
    np.testing.assert_allclose(apply_single(gate_h(), 1, zero_state(1)), [S2, S2], atol=1e-15)
    s = np.array([0.6, 0.8j])
    np.testing.assert_array_equal(apply_single(gate_ry(0.0), 1, s), s)
    one_zero = np.array([0, 0, 1, 0], dtype=complex)
    np.testing.assert_allclose(apply_controlled(gate_ry(np.pi), 1, 2, one_zero), [0, 0, 0, 1], atol=1e-12)
    np.testing.assert_array_equal(apply_controlled(gate_ry(1.3), 1, 2, zero_state(2)), zero_state(2))


def test_gates_preserve_norm(rng):
    for _ in range(20):
        s = _random_state(rng, 4)
        theta = rng.uniform(-np.pi, 3 * np.pi)
        q, other = rng.choice(np.arange(1, 5), size=2, replace=False)
        for out in (apply_single(gate_ry(theta), q, s), apply_single(gate_h(), q, s),
                    apply_single(gate_x(), q, s), apply_controlled(gate_ry(theta), q, other, s)):
            assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_cry_block_form(rng):
    theta = 0.83
    m = gate_cry(theta)
    np.testing.assert_array_equal(m[:2, :2], np.eye(2))
    np.testing.assert_array_equal(m[2:, 2:], gate_ry(theta))
    np.testing.assert_array_equal(m[:2, 2:], 0)
    np.testing.assert_array_equal(m[2:, :2], 0)

    # controlled Ry on qubits 3 -> 4 of a 4-qubit register is I (x) I (x) CRy
    s = _random_state(rng, 4)
    dense = np.kron(np.eye(4), m)
    np.testing.assert_allclose(apply_controlled(gate_ry(theta), 3, 4, s), apply_dense(dense, s), atol=1e-12)


def test_apply_dense_examples(rng):
    s = _random_state(rng, 2)
    np.testing.assert_array_equal(apply_dense(np.eye(4), s), s)
    np.testing.assert_array_equal(apply_dense(np.zeros((4, 4)), s), np.zeros(4))
    np.testing.assert_allclose(apply_dense(gate_y(), np.array([1.0, 0.0])), [0, 1j])


def test_inner_product_examples(rng):
    s = _random_state(rng, 3)
    assert inner_product(s, s) == pytest.approx(1.0)
    assert inner_product(zero_state(1), np.array([0.0, 1.0])) == 0
    a = np.array([1, 1j]) / np.sqrt(2.0)
    b = np.array([1, -1j]) / np.sqrt(2.0)
    assert inner_product(a, b) == pytest.approx(0.0, abs=1e-15)
