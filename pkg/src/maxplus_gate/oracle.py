"""Exhaustive reference solver for small instances.

The oracle does not touch the bank machinery.  It rebuilds every propagator
with ``scipy.linalg.expm``, simulates the dynamics forward in time from the
query unitary for every action sequence, and takes the minimum of running
cost plus scaled terminal penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import random_unitary
from .model import ControlSystem, DiscretizedControlSet

__all__ = ["OracleLimitError", "OracleResult", "brute_force_value", "brute_force_values", "compare", "CompareReport"]

DEFAULT_LIMIT = 10**7


class OracleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: float
    best_sequence: list
    n_sequences_enumerated: int


def _oracle_ops(sys, cset):
    props, costs = [], []
    for act in cset.actions:
        if act.is_zero:
            props.append(np.eye(sys.dim, dtype=complex))
            costs.append(0.0)
        else:
            h = sys.hamiltonians[act.index]
            props.append(scipy.linalg.expm(-1j * act.sign * sys.tau * h))
            v = np.zeros(sys.M)
            v[act.index] = act.sign
            costs.append(float(np.sqrt(v @ (sys.R * v))) * sys.tau)
    return np.array(props), np.array(costs)


def _check_limit(K, N, limit):
    total = K**N
    if total > limit:
        raise OracleLimitError(
            f"{K}^{N} = {total} sequences exceeds the oracle limit of {limit}; use a smaller horizon"
        )
    return total


def _min_over_sequences(props, costs, u, N, eps):
    """Minimum over all length-N sequences, enumerated depth-first by first-applied action.

    Returns the value and the minimising sequence in time order.
    """
    d = u.shape[0]
    K = len(costs)
    if N == 0:
        return max(2 * d - 2 * np.trace(u).real, 0.0) / eps, ()
    best_val, best_seq = np.inf, None
    for first in range(K):
        states = (props[first] @ u)[None]
        acc = np.array([costs[first]])
        for _ in range(N - 1):
            states = np.matmul(props[None, :], states[:, None]).reshape(-1, d, d)
            acc = (acc[:, None] + costs[None, :]).reshape(-1)
        phi = np.maximum(2 * d - 2 * np.trace(states, axis1=1, axis2=2).real, 0.0)
        total = acc + phi / eps
        j = int(np.argmin(total))
        if total[j] < best_val:
            best_val = float(total[j])
            rest = np.unravel_index(j, (K,) * (N - 1)) if N > 1 else ()
            best_seq = (first,) + tuple(int(r) for r in rest)
    return best_val, best_seq


def brute_force_value(
    sys: ControlSystem,
    cset: DiscretizedControlSet,
    u,
    N: int | None = None,
    epsilon: float | None = None,
    limit: int = DEFAULT_LIMIT,
) -> OracleResult:
    """Exact minimum over every length-``N`` action sequence at unitary ``u``.

    ``best_sequence`` uses the bank convention: the *last* element is the
    first one applied to ``u``.
    """
    N = sys.n_steps if N is None else N
    eps = sys.epsilon if epsilon is None else epsilon
    total = _check_limit(len(cset), N, limit)
    props, costs = _oracle_ops(sys, cset)
    value, seq = _min_over_sequences(props, costs, np.asarray(u, dtype=complex), N, eps)
    return OracleResult(value, [cset.actions[i] for i in reversed(seq)], total)


def brute_force_values(sys, cset, us, N=None, epsilon=None, limit=DEFAULT_LIMIT) -> np.ndarray:
    N = sys.n_steps if N is None else N
    eps = sys.epsilon if epsilon is None else epsilon
    _check_limit(len(cset), N, limit)
    props, costs = _oracle_ops(sys, cset)
    return np.array([_min_over_sequences(props, costs, np.asarray(u, dtype=complex), N, eps)[0] for u in us])


@dataclass
class CompareReport:
    n_points: int
    horizon: int
    gap_unpruned: float
    gap_dominance: float
    min_gap_capped: float
    max_gap_capped: float
    cap: int
    bank_sizes: dict

    @property
    def passed(self) -> bool:
        return self.gap_unpruned <= 1e-10 and self.gap_dominance <= 1e-10 and self.min_gap_capped >= -1e-10

    def __str__(self):
        lines = [
            f"oracle comparison: {self.n_points} random special-unitaries, N = {self.horizon}",
            f"  no pruning      max |dp - oracle| = {self.gap_unpruned:.3e}  (bank {self.bank_sizes['none']})",
            f"  dominance only  max |dp - oracle| = {self.gap_dominance:.3e}  (bank {self.bank_sizes['dominance']})",
            f"  cap = {self.cap:<9d} min (dp - oracle) = {self.min_gap_capped:.3e}, "
            f"max = {self.max_gap_capped:.3e}  (bank {self.bank_sizes['capped']})",
            f"  verdict: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines)


def compare(sys: ControlSystem, cset: DiscretizedControlSet, N=None, n_points=100, seed=0, cap=50, samples=128):
    """Compare the bank solver against the oracle under three pruning settings."""
    from .dp import evaluate_many, init_bank, propagate_step
    from .pruning import DOMINANCE_ONLY, PruneConfig

    N = sys.n_steps if N is None else N
    sys = sys.replace(n_steps=N)
    rng = np.random.default_rng(seed)
    us = np.array([random_unitary(sys.dim, rng) for _ in range(n_points)])
    ref = brute_force_values(sys, cset, us, N)

    configs = {
        "none": PruneConfig(enabled=False, dedupe=False),
        "dominance": PruneConfig(mode=DOMINANCE_ONLY),
        "capped": PruneConfig(cap=cap, sample_count=samples, seed=seed),
    }
    gaps, sizes = {}, {}
    for name, cfg in configs.items():
        bank = init_bank(sys, cset)
        for _ in range(N):
            bank = propagate_step(bank, cfg)
        vals, _ = evaluate_many(bank, us)
        gaps[name] = vals - ref
        sizes[name] = len(bank)
    return CompareReport(
        n_points,
        N,
        float(np.max(np.abs(gaps["none"]))),
        float(np.max(np.abs(gaps["dominance"]))),
        float(np.min(gaps["capped"])),
        float(np.max(gaps["capped"])),
        cap,
        sizes,
    )
