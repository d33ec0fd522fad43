import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxplus_gate.linalg import expm_skew, pauli, pauli_string, random_unitary
from maxplus_gate.model import (
    ControlAction,
    ControlSystem,
    build_su2_example,
    build_su4_example,
    build_system,
    control_set,
    control_symmetries,
    running_cost,
    terminal_penalty,
)


def test_su4_preset_shape_and_weights():
    sys = build_su4_example(1 / 1.3)
    assert sys.labels == ("IX", "IZ", "XI", "ZI", "XZ")
    assert sys.n_qubits == 2 and sys.dim == 4 and sys.M == 5
    assert sys.R[4] == pytest.approx(1.69)
    assert build_su4_example(1 / 3).R[4] == pytest.approx(9.0)
    np.testing.assert_array_equal(sys.R[:4], 1.0)
    assert sys.horizon == pytest.approx(4.0)
    assert build_su4_example(1 / 1.3, "XX").labels[-1] == "XX"


def test_su4_two_body_step_cost_ratio():
    sys = build_su4_example(1 / 1.3)
    one = running_cost(ControlAction.axis(0), sys)
    two = running_cost(ControlAction.axis(4, -1), sys)
    assert one / two == pytest.approx(1 / 1.3)


@pytest.mark.parametrize("bad", ["XI", "X", "XXX", "IZ"])
def test_su4_rejects_bad_two_body(bad):
    with pytest.raises(ValueError):
        build_su4_example(0.5, bad)


def test_system_validation():
    X = pauli("X")
    with pytest.raises(ValueError, match="Hermitian"):
        ControlSystem((1j * X,), ("a",), (1.0,))
    with pytest.raises(ValueError, match="traceless"):
        ControlSystem((np.eye(2),), ("a",), (1.0,))
    with pytest.raises(ValueError, match="positive"):
        ControlSystem((X,), ("a",), (0.0,))
    with pytest.raises(ValueError, match="power of two"):
        ControlSystem((np.diag([1.0, -1.0, 0.0]),), ("a",), (1.0,))
    with pytest.raises(ValueError):
        ControlSystem((X,), ("a",), (1.0, 2.0))
    with pytest.raises(ValueError):
        build_system(("X", "XZ"), (1, 1))


def test_system_is_immutable():
    sys = build_su2_example()
    with pytest.raises(Exception):
        sys.tau = 1.0
    with pytest.raises(ValueError):
        sys.R[0] = 5.0
    assert sys.replace(n_steps=3).n_steps == 3 and sys.n_steps == 6


def test_running_cost_examples():
    sys = build_system(("X", "Z"), (4.0, 1.0), tau=0.2)
    assert running_cost(ControlAction.zero(), sys) == 0.0
    assert running_cost(ControlAction.axis(0, -1), sys) == pytest.approx(0.4)
    assert running_cost(ControlAction.axis(1, 1), sys) == pytest.approx(0.2)
    with pytest.raises(IndexError):
        running_cost(ControlAction.axis(2), sys)


def test_action_validation_and_labels():
    with pytest.raises(ValueError):
        ControlAction(None, 1)
    with pytest.raises(ValueError):
        ControlAction(0, 0)
    assert ControlAction.zero().label() == "0"
    assert ControlAction.axis(1, -1).label(("X", "Z")) == "-Z"
    assert ControlAction.axis(0).label() == "+H1"


def test_terminal_penalty_examples():
    sys = build_su2_example()
    assert terminal_penalty(np.eye(2), sys) == 0.0
    assert terminal_penalty(-np.eye(2), sys) == pytest.approx(8.0)
    assert terminal_penalty(pauli("X") * 1j, sys) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        terminal_penalty(2 * np.eye(2), sys)
    with pytest.raises(ValueError):
        terminal_penalty(np.eye(4), sys)


def test_terminal_penalty_nonnegative_and_zero_only_at_identity():
    sys = build_su2_example()
    rng = np.random.default_rng(0)
    for _ in range(200):
        h = rng.standard_normal(3)
        u = expm_skew(h[0] * pauli("X") + h[1] * pauli("Y") + h[2] * pauli("Z"), 1.0)
        pen = terminal_penalty(u, sys)
        assert pen >= 0
        if np.linalg.norm(u - np.eye(2)) > 1e-3:
            assert pen > 0


def test_control_set_layout():
    sys = build_su2_example()
    cs = control_set(sys)
    assert len(cs) == 5
    assert cs.describe() == "0,+X,-X,+Z,-Z"
    np.testing.assert_array_equal(cs.propagators[0], np.eye(2))
    np.testing.assert_allclose(cs.propagators[1], expm_skew(pauli("X"), 0.2))
    np.testing.assert_allclose(cs.propagators[1] @ cs.propagators[2], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(cs.step_costs, [0, 0.2, 0.2, 0.2, 0.2])
    assert len(control_set(sys, signed=False)) == 3
    assert len(control_set(build_su4_example(0.5))) == 11


def test_control_symmetries():
    su2 = build_su2_example()
    assert len(control_symmetries(su2)) == 4
    assert len(control_symmetries(su2, signed=False)) == 1
    su4 = build_su4_example(0.5)
    syms = control_symmetries(su4)
    assert len(syms) == 16
    np.testing.assert_array_equal(syms[0], np.eye(4))
    for p in syms:
        for h in su4.hamiltonians:
            g = p @ h @ p.conj().T
            assert np.allclose(g, h) or np.allclose(g, -h)
    # unsigned: exactly the 8 Pauli strings commuting with XZ
    assert len(control_symmetries(build_system(("XZ",), (1,)), signed=False)) == 8


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1, 2, 3]))
def test_property_penalty_range_and_conjugation(seed, n):
    sys = build_system(("X" + "I" * (n - 1),), (1.0,))
    rng = np.random.default_rng(seed)
    u, w = random_unitary(sys.dim, rng), random_unitary(sys.dim, rng)
    pen = terminal_penalty(u, sys)
    assert 0 <= pen <= 4 * sys.dim
    assert terminal_penalty(w @ u @ w.conj().T, sys) == pytest.approx(pen, abs=1e-10)
    assert terminal_penalty(-np.eye(sys.dim), sys) == 4 * sys.dim


def test_step_cost_independent_of_sign():
    sys = build_su4_example(1 / 3)
    for k in range(sys.M):
        assert running_cost(ControlAction.axis(k, 1), sys) == running_cost(ControlAction.axis(k, -1), sys)
