import itertools

import numpy as np
import pytest

from maxplus_gate.dp import evaluate_value, init_bank, propagate_step, replay
from maxplus_gate.linalg import expm_skew, pauli, random_unitary
from maxplus_gate.model import build_su2_example, build_system, control_set
from maxplus_gate.oracle import OracleLimitError, brute_force_value, brute_force_values, compare
from maxplus_gate.pruning import PruneConfig


def test_identity_and_empty_horizon(su2, su2_set, su2_points):
    r = brute_force_value(su2, su2_set, np.eye(2), N=3)
    assert r.value == 0.0
    assert all(a.is_zero for a in r.best_sequence)
    assert r.n_sequences_enumerated == 125
    u = su2_points[0]
    r0 = brute_force_value(su2, su2_set, u, N=0)
    assert r0.value == pytest.approx((4 - 2 * np.trace(u).real) / su2.epsilon)
    assert r0.best_sequence == [] and r0.n_sequences_enumerated == 1


def test_limit(su2, su2_set):
    with pytest.raises(OracleLimitError, match="smaller"):
        brute_force_value(su2, su2_set, np.eye(2), N=6, limit=1000)
    with pytest.raises(OracleLimitError):
        brute_force_values(su2, su2_set, [np.eye(2)], N=2, limit=24)


def test_matches_naive_loop(su2_set):
    # plain nested loop over every sequence, time-ordered product applied to u
    sys = build_su2_example(n_steps=3)
    u = random_unitary(2, 77)
    ops = list(zip(su2_set.propagators, su2_set.step_costs))
    best = np.inf
    for seq in itertools.product(range(5), repeat=3):
        state, cost = u, 0.0
        for j in seq:
            state = ops[j][0] @ state
            cost += ops[j][1]
        best = min(best, cost + max(4 - 2 * np.trace(state).real, 0) / sys.epsilon)
    assert brute_force_value(sys, su2_set, u).value == pytest.approx(best, abs=1e-12)


def test_su2_n3_example(su2_set):
    sys = build_su2_example(tau=0.2, n_steps=3)
    u = expm_skew(pauli("X"), 0.6)
    ref = brute_force_value(sys, su2_set, u)
    bank = init_bank(sys, su2_set)
    for _ in range(3):
        bank = propagate_step(bank)
    v, i = evaluate_value(bank, u)
    assert abs(v - ref.value) <= 1e-10
    assert ref.value == pytest.approx(0.6)  # three -X steps undo the rotation exactly
    atom = replay(ref.best_sequence, su2_set)
    assert atom.run_cost + (4 - 2 * np.trace(atom.A @ u).real) / sys.epsilon == pytest.approx(ref.value)


def test_monotone_in_horizon(su2, su2_set, su2_points):
    for u in su2_points[:5]:
        vals = [brute_force_value(su2, su2_set, u, N=n).value for n in range(5)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_sign_symmetry(su2, su2_set):
    rng = np.random.default_rng(4)
    X, Z = pauli("X"), pauli("Z")
    for _ in range(10):
        a, b = rng.uniform(-np.pi, np.pi, 2)
        v1 = brute_force_value(su2, su2_set, expm_skew(a * X + b * Z, 1.0), N=4).value
        v2 = brute_force_value(su2, su2_set, expm_skew(-a * X - b * Z, 1.0), N=4).value
        assert abs(v1 - v2) <= 1e-10


def test_cross_check_unsigned_set():
    sys = build_system(("X", "Z"), (1.0, 2.0), n_steps=4)
    cs = control_set(sys, signed=False)
    us = [random_unitary(2, s) for s in range(10)]
    ref = brute_force_values(sys, cs, us)
    bank = init_bank(sys, cs)
    for _ in range(4):
        bank = propagate_step(bank)
    got = [evaluate_value(bank, u)[0] for u in us]
    np.testing.assert_allclose(got, ref, atol=1e-10)


def test_compare_report(su2, su2_set):
    rep = compare(su2.replace(n_steps=4), su2_set, n_points=20, cap=20, samples=16)
    assert rep.passed
    assert rep.gap_unpruned <= 1e-10 and rep.gap_dominance <= 1e-10
    assert rep.min_gap_capped >= -1e-10
    assert rep.bank_sizes["none"] == 625
    assert rep.bank_sizes["dominance"] < 625
    assert rep.bank_sizes["capped"] <= 20
    assert "verdict: PASS" in str(rep)
