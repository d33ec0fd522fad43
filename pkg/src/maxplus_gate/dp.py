"""Bank propagation for the relaxed fixed-horizon problem.

The value function after ``k`` backward steps is a pointwise minimum of
functions of the form

    p(U) = c + (1/eps) * (2d - 2 Re tr(A U)),

one per surviving control sequence.  A bank stores the pairs ``(c, A)``;
extending a sequence by one action multiplies ``A`` on the right by the
action's propagator and adds its step cost.  Keeping ``eps`` out of the
stored atoms means a bank can be evaluated for any penalty weight.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import unitarity_residual
from .model import ControlAction, ControlSystem, DiscretizedControlSet, control_set
from .pruning import PruneConfig, dedupe_indices, select_survivors

__all__ = [
    "CostAtom",
    "StepStats",
    "Bank",
    "Feasibility",
    "init_bank",
    "extend_atom",
    "propagate_step",
    "solve",
    "atom_values",
    "evaluate_value",
    "evaluate_many",
    "extract_sequence",
    "feasible",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CostAtom:
    run_cost: float
    A: np.ndarray
    depth: int = 0
    parent: int = -1
    action: ControlAction | None = None


@dataclass
class StepStats:
    step: int
    generated: int
    deduped: int = 0
    dominated: int = 0
    capped: int = 0
    size: int = 0
    seconds: float = 0.0

    def line(self) -> str:
        return (
            f"step {self.step:3d}: generated={self.generated} deduped={self.deduped} "
            f"dominated={self.dominated} capped={self.capped} size={self.size} ({self.seconds:.2f}s)"
        )


@dataclass(eq=False)
class Bank:
    """Surviving cost atoms after ``step`` propagation steps.

    ``costs[i]`` and ``mats[i]`` are the running cost and accumulated
    propagator product of atom ``i``.  ``history[k - 1]`` holds the
    ``(parent, action)`` index arrays of the atoms created at step ``k``, so
    lineages can be walked back to the root.  ``zero_chain`` is the index of
    the all-zero sequence, or ``-1`` once it has been dropped.
    """

    system: ControlSystem
    cset: DiscretizedControlSet
    costs: np.ndarray
    mats: np.ndarray
    step: int = 0
    history: list = field(default_factory=list)
    zero_chain: int = 0
    stats: list = field(default_factory=list)
    snapshots: list | None = None

    def __len__(self):
        return len(self.costs)

    @property
    def dim(self) -> int:
        return self.mats.shape[-1]

    @property
    def parents(self) -> np.ndarray:
        return self.history[-1][0] if self.history else np.full(len(self), -1)

    @property
    def actions(self) -> np.ndarray:
        return self.history[-1][1] if self.history else np.full(len(self), -1)

    def atom(self, i: int) -> CostAtom:
        if not 0 <= i < len(self):
            raise IndexError(f"atom id {i} not in bank of size {len(self)}")
        act = int(self.actions[i])
        return CostAtom(
            float(self.costs[i]),
            self.mats[i],
            self.step,
            int(self.parents[i]),
            self.cset.actions[act] if act >= 0 else None,
        )

    @property
    def atoms(self) -> list:
        return [self.atom(i) for i in range(len(self))]

    def subset(self, keep) -> "Bank":
        keep = np.asarray(keep, dtype=np.int64)
        history = list(self.history)
        if history:
            parents, actions = history[-1]
            history[-1] = (parents[keep], actions[keep])
        zc = -1
        if self.zero_chain >= 0:
            hit = np.flatnonzero(keep == self.zero_chain)
            zc = int(hit[0]) if hit.size else -1
        return Bank(
            self.system,
            self.cset,
            self.costs[keep],
            self.mats[keep],
            self.step,
            history,
            zc,
            list(self.stats),
            self.snapshots,
        )

    def max_unitarity_residual(self) -> float:
        if not len(self):
            return 0.0
        eye = np.eye(self.dim)
        gram = np.conj(np.swapaxes(self.mats, -1, -2)) @ self.mats
        return float(np.max(np.linalg.norm(gram - eye, axis=(-2, -1))))


def init_bank(sys: ControlSystem, cset: DiscretizedControlSet | None = None, keep_snapshots=False) -> Bank:
    """Bank holding the single root atom ``(0, I)``."""
    if cset is None:
        cset = control_set(sys)
    d = sys.dim
    bank = Bank(sys, cset, np.zeros(1), np.eye(d, dtype=complex)[None].copy())
    if keep_snapshots:
        bank.snapshots = [(bank.costs, bank.mats)]
    return bank


def extend_atom(atom: CostAtom, action: ControlAction, cset: DiscretizedControlSet, parent_id: int = -1) -> CostAtom:
    i = cset.index(action)
    A = atom.A.copy() if action.is_zero else atom.A @ cset.propagators[i]
    return CostAtom(atom.run_cost + float(cset.step_costs[i]), A, atom.depth + 1, parent_id, action)


def propagate_step(bank: Bank, cfg: PruneConfig | None = None) -> Bank:
    """Apply one step of the dynamic programming operator to the whole bank.

    Every atom is extended by every action of the control set (candidate
    ``i * K + j`` is atom ``i`` followed by action ``j``), exact duplicates
    are merged, and the result is pruned according to ``cfg``.
    """
    sys = bank.system
    if bank.step >= sys.n_steps:
        raise ValueError(f"bank is already at the final step {sys.n_steps}")
    cfg = cfg or PruneConfig(enabled=False, dedupe=False)
    t0 = time.perf_counter()
    cset = bank.cset
    n, K = len(bank), len(cset)
    costs = (bank.costs[:, None] + cset.step_costs[None, :]).reshape(-1)
    mats = np.matmul(bank.mats[:, None], cset.propagators[None]).reshape(n * K, bank.dim, bank.dim)
    zero = [i for i, a in enumerate(cset.actions) if a.is_zero]
    for j in zero:
        mats[j::K] = bank.mats
    parents = np.repeat(np.arange(n), K)
    actions = np.tile(np.arange(K), n)

    stats = StepStats(bank.step + 1, generated=n * K)
    new = Bank(
        sys,
        cset,
        costs,
        mats,
        bank.step + 1,
        list(bank.history) + [(parents, actions)],
        bank.zero_chain * K + zero[0] if (bank.zero_chain >= 0 and zero) else -1,
        list(bank.stats),
        bank.snapshots,
    )
    if cfg.dedupe:
        keep = dedupe_indices(new.costs, new.mats)
        stats.deduped = len(new) - len(keep)
        new = new.subset(keep)
    if cfg.enabled:
        keep, counts = select_survivors(
            new.costs, new.mats, sys.epsilon, cfg, zero_chain=new.zero_chain, symmetries=cset.symmetries
        )
        stats.dominated = counts["dominated"]
        stats.capped = counts["capped"]
        new = new.subset(keep)
    stats.size = len(new)
    stats.seconds = time.perf_counter() - t0
    new.stats.append(stats)
    if new.snapshots is not None:
        new.snapshots = list(new.snapshots) + [(new.costs, new.mats)]
    log.info(stats.line())
    return new


def solve(sys: ControlSystem, cfg: PruneConfig | None = None, signed=True, keep_snapshots=False, callback=None) -> Bank:
    """Run all ``sys.n_steps`` propagation steps from the root atom."""
    bank = init_bank(sys, control_set(sys, signed=signed), keep_snapshots=keep_snapshots)
    for _ in range(sys.n_steps):
        bank = propagate_step(bank, cfg)
        if callback is not None:
            callback(bank)
    return bank


def _penalty_scale(epsilon):
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return 1.0 / epsilon


def atom_values(costs, mats, us, epsilon) -> np.ndarray:
    """Matrix of ``p_i(u_j)`` for atoms ``i`` and targets ``j``."""
    us = np.asarray(us, dtype=complex)
    if us.ndim == 2:
        us = us[None]
    d = mats.shape[-1]
    # tr(A u) = sum_ij A_ij u_ji
    tr = mats.reshape(len(mats), -1) @ np.swapaxes(us, -1, -2).reshape(len(us), -1).T
    phi = np.maximum(2.0 * d - 2.0 * tr.real, 0.0)
    return costs[:, None] + _penalty_scale(epsilon) * phi


def _check_target(u, d):
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise ValueError(f"target has shape {u.shape}, expected {(d, d)}")
    res = unitarity_residual(u)
    if res > 1e-8:
        raise ValueError(f"target is not unitary (residual {res:.3e})")
    return u


def _sources(bank: Bank, union: bool):
    if not union:
        return [(bank.step, bank.costs, bank.mats)]
    if bank.snapshots is None:
        raise ValueError("union evaluation needs a bank built with keep_snapshots=True")
    return [(k, c, m) for k, (c, m) in enumerate(bank.snapshots)]


def evaluate_value(bank: Bank, u, epsilon: float | None = None, union: bool = False):
    """Minimum over atoms of ``p(u)`` and the id of the minimising atom.

    Ties go to the lowest id.  With ``union=True`` the minimum runs over the
    banks of every step and the id is a ``(step, index)`` pair.
    """
    if len(bank) == 0:
        raise ValueError("cannot evaluate an empty bank")
    eps = bank.system.epsilon if epsilon is None else epsilon
    u = _check_target(u, bank.dim)
    ut = u.T.reshape(-1)
    scale = _penalty_scale(eps)
    best, best_id = np.inf, None
    for step, costs, mats in _sources(bank, union):
        tr = mats.reshape(len(mats), -1) @ ut
        p = costs + scale * np.maximum(2.0 * bank.dim - 2.0 * tr.real, 0.0)
        i = int(np.argmin(p))
        if p[i] < best:
            best, best_id = float(p[i]), ((step, i) if union else i)
    return best, best_id


def evaluate_many(bank: Bank, us, epsilon: float | None = None, union: bool = False):
    """Vector form of :func:`evaluate_value`; each target is evaluated independently."""
    us = np.asarray(us, dtype=complex)
    values = np.empty(len(us))
    ids = []
    for j, u in enumerate(us):
        values[j], best = evaluate_value(bank, u, epsilon, union)
        ids.append(best)
    return values, ids


def extract_sequence(bank: Bank, atom_id, step: int | None = None) -> list:
    """Actions from the root to ``atom_id``, in the order they were appended.

    The returned list ``[a_1, ..., a_k]`` gives ``A = P(a_1) ... P(a_k)``;
    in physical time ``a_k`` is applied first to the initial unitary.
    """
    if isinstance(atom_id, tuple):
        step, atom_id = atom_id
    step = bank.step if step is None else step
    if not 0 <= step <= bank.step:
        raise IndexError(f"step {step} outside 0..{bank.step}")
    size = len(bank.history[step - 1][0]) if step > 0 else 1
    if not 0 <= atom_id < size:
        raise IndexError(f"atom id {atom_id} not present at step {step}")
    seq = []
    i = int(atom_id)
    for k in range(step, 0, -1):
        parents, actions = bank.history[k - 1]
        seq.append(bank.cset.actions[int(actions[i])])
        i = int(parents[i])
    seq.reverse()
    return seq


def replay(sequence, cset: DiscretizedControlSet) -> CostAtom:
    d = cset.propagators.shape[-1]
    atom = CostAtom(0.0, np.eye(d, dtype=complex))
    for act in sequence:
        atom = extend_atom(atom, act, cset)
    return atom


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    value: float
    residual: float
    atom_id: object


def feasible(bank: Bank, u, penalty_tol: float = 1e-6, epsilon: float | None = None, union: bool = False) -> Feasibility:
    """Can some stored sequence bring ``u`` to the identity within ``penalty_tol``?

    ``residual`` is the smallest terminal penalty ``2d - 2 Re tr(A u)`` over
    the bank, and ``value`` the full cost of the atom attaining it (lowest
    running cost among exact ties).
    """
    if len(bank) == 0:
        raise ValueError("cannot evaluate an empty bank")
    eps = bank.system.epsilon if epsilon is None else epsilon
    u = _check_target(u, bank.dim)
    ut = u.T.reshape(-1)
    best = None
    for step, costs, mats in _sources(bank, union):
        tr = mats.reshape(len(mats), -1) @ ut
        phi = np.maximum(2.0 * bank.dim - 2.0 * tr.real, 0.0)
        order = np.lexsort((costs, phi))
        i = int(order[0])
        key = (phi[i], costs[i])
        if best is None or key < best[0]:
            best = (key, (step, i) if union else i)
    (phi, cost), atom_id = best
    return Feasibility(bool(phi <= penalty_tol), float(cost + phi / eps), float(phi), atom_id)
