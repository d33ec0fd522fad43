"""Bank pruning: duplicate merging, certified dominance, and a capped keep-set.

An atom ``b`` can be dropped without changing the value function anywhere
on the group if some other atom ``a`` satisfies ``p_a(U) <= p_b(U)`` for
every unitary ``U``.  Since

    p_a(U) - p_b(U) = (c_a - c_b) + (2/eps) Re tr((A_b - A_a) U)

and ``max_U Re tr(B U)`` over the unitary group is the nuclear norm of
``B``, the test ``(c_a - c_b) + (2/eps) ||A_b - A_a||_* <= 0`` certifies
this.  When the bank is still over the cap after that, the importance of
each atom is estimated on a fixed sample of unitaries and the least
important ones are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .linalg import nuclear_norm, random_unitary

__all__ = [
    "PruneConfig",
    "DOMINANCE_ONLY",
    "DOMINANCE_PLUS_CAP",
    "dominates",
    "dedupe_indices",
    "dominated_mask",
    "estimate_importance",
    "sample_unitaries",
    "importance_samples",
    "select_survivors",
    "prune_bank",
]

DOMINANCE_ONLY = "dominance"
DOMINANCE_PLUS_CAP = "dominance+cap"
DEDUPE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PruneConfig:
    """Pruning knobs.

    ``targets`` is an optional stack of unitaries added to the random
    samples used for the importance estimate, so that atoms that matter at
    query points survive the cap.  With ``symmetrize`` each random sample is
    replaced by its orbit under the control-set symmetries, which keeps the
    capped bank as symmetric as the problem itself.
    """

    enabled: bool = True
    mode: str = DOMINANCE_PLUS_CAP
    cap: int = 5000
    sample_count: int = 128
    seed: int = 0
    protect_zero_chain: bool = True
    dedupe: bool = True
    symmetrize: bool = True
    targets: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in (DOMINANCE_ONLY, DOMINANCE_PLUS_CAP):
            raise ValueError(f"unknown prune mode {self.mode!r}")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.mode == DOMINANCE_PLUS_CAP and self.sample_count < 1 and self.targets is None:
            raise ValueError("capped pruning needs at least one sample")

    @property
    def capped(self) -> bool:
        return self.mode == DOMINANCE_PLUS_CAP


def dominates(a, b, epsilon: float) -> bool:
    """True when atom ``a`` is no worse than atom ``b`` at every unitary."""
    dc = a.run_cost - b.run_cost
    diff = np.asarray(b.A) - np.asarray(a.A)
    d = diff.shape[-1]
    scale = 2.0 / epsilon
    frob = float(np.linalg.norm(diff))
    # ||B||_F <= ||B||_* <= sqrt(d) ||B||_F
    if dc + scale * frob > 0:
        return False
    if dc + scale * np.sqrt(d) * frob <= 0:
        return True
    return dc + scale * nuclear_norm(diff) <= 0


def dedupe_indices(costs, mats, tol: float = DEDUPE_TOL) -> np.ndarray:
    """Indices of the atoms left after merging exact duplicates.

    Two atoms are duplicates when their costs differ by at most ``tol`` and
    their matrices by at most ``tol`` in Frobenius norm; the lower index is
    kept.  Candidates are bucketed on a coarse rounding of all entries and
    only compared within a bucket.
    """
    n = len(costs)
    if n <= 1:
        return np.arange(n)
    feats = np.concatenate([costs[:, None], mats.reshape(n, -1).view(float)], axis=1)
    keys = np.round(feats * 1e9).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    drop = np.zeros(n, dtype=bool)
    for bucket in np.flatnonzero(counts > 1):
        members = np.flatnonzero(inverse == bucket)
        for pos, i in enumerate(members):
            if drop[i]:
                continue
            rest = members[pos + 1 :]
            rest = rest[~drop[rest]]
            if not rest.size:
                continue
            close = (np.abs(costs[rest] - costs[i]) <= tol) & (
                np.linalg.norm(mats[rest] - mats[i], axis=(-2, -1)) <= tol
            )
            drop[rest[close]] = True
    return np.flatnonzero(~drop)


def dominated_mask(costs, mats, epsilon: float, protect: int = -1) -> np.ndarray:
    """Mask of atoms certified dominated by an atom that precedes them.

    Atoms are ordered by ``(cost, index)``; atom ``b`` is marked when some
    earlier atom dominates it.  Domination is transitive and only an earlier
    atom can dominate a later one (barring exact duplicates, which the
    ordering also resolves), so every marked atom is covered by an unmarked
    one and removing all of them leaves the value function unchanged.
    """
    n = len(costs)
    mask = np.zeros(n, dtype=bool)
    if n <= 1:
        return mask
    d = mats.shape[-1]
    scale = 2.0 / epsilon
    flat = mats.reshape(n, -1).view(float)
    rank = np.empty(n, dtype=np.int64)
    rank[np.lexsort((np.arange(n), costs))] = np.arange(n)
    # a can only dominate b if ||A_b - A_a||_F <= (c_b - c_a) / scale <= (c_b - c_min) / scale
    radii = (costs - costs.min()) / scale
    candidates = np.flatnonzero(radii > 0)
    if candidates.size:
        tree = cKDTree(flat)
        hits = tree.query_ball_point(flat[candidates], radii[candidates] * (1 + 1e-12))
        pairs_a, pairs_b = [], []
        for b, near in zip(candidates, hits):
            if len(near) > 1:
                near = np.asarray(near)
                near = near[rank[near] < rank[b]]
                pairs_a.append(near)
                pairs_b.append(np.full(near.size, b))
        if pairs_a:
            pa = np.concatenate(pairs_a)
            pb = np.concatenate(pairs_b)
            dc = costs[pa] - costs[pb]
            frob = np.linalg.norm(flat[pb] - flat[pa], axis=1)
            maybe = dc + scale * frob <= 0
            pa, pb, dc, frob = pa[maybe], pb[maybe], dc[maybe], frob[maybe]
            sure = dc + scale * np.sqrt(d) * frob <= 0
            mask[pb[sure]] = True
            pa, pb, dc = pa[~sure], pb[~sure], dc[~sure]
            keep = ~mask[pb]
            pa, pb, dc = pa[keep], pb[keep], dc[keep]
            if pa.size:
                nuc = nuclear_norm(mats[pb] - mats[pa])
                mask[pb[dc + scale * nuc <= 0]] = True
    # zero radius: only exact copies of a cheapest atom can be dominated
    flat_zero = np.flatnonzero(radii == 0)
    if flat_zero.size > 1:
        order = flat_zero[np.argsort(rank[flat_zero])]
        for pos, b in enumerate(order[1:], start=1):
            earlier = order[:pos]
            same = np.all(flat[earlier] == flat[b], axis=1)
            if same.any():
                mask[b] = True
    if protect >= 0:
        mask[protect] = False
    return mask


def sample_unitaries(dim: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty((count, dim, dim), dtype=complex)
    for i in range(count):
        out[i] = random_unitary(dim, rng)
    return out


def _importance(costs, mats, samples, epsilon, chunk=64):
    """Importance scores and the per-sample minimising atoms."""
    n = len(costs)
    d = mats.shape[-1]
    flat = mats.reshape(n, -1)
    scale = 1.0 / epsilon
    w = np.full(n, -np.inf)
    winners = np.empty(len(samples), dtype=np.int64)
    if n == 1:
        winners[:] = 0
        return np.array([np.inf]), winners
    for start in range(0, len(samples), chunk):
        block = samples[start : start + chunk]
        ut = np.swapaxes(block, -1, -2).reshape(len(block), -1)
        p = costs[:, None] + scale * np.maximum(2.0 * d - 2.0 * (flat @ ut.T).real, 0.0)
        i1 = np.argmin(p, axis=0)
        cols = np.arange(p.shape[1])
        m1 = p[i1, cols]
        p[i1, cols] = np.inf
        m2 = p.min(axis=0)
        p[i1, cols] = m1
        margin = m1[None, :] - p
        margin[i1, cols] = m2 - m1
        np.maximum(w, margin.max(axis=1), out=w)
        winners[start : start + len(block)] = i1
    return w, winners


def estimate_importance(bank, samples, epsilon: float | None = None) -> np.ndarray:
    """Sampled importance of each atom.

    Entry ``i`` is ``max_s min_{j != i} (p_j(U_s) - p_i(U_s))`` over the
    sample unitaries ``U_s``: a lower bound on the true importance, positive
    exactly when atom ``i`` is the unique minimiser at some sample.  A bank
    with a single atom scores ``+inf``.
    """
    if len(bank) == 0:
        raise ValueError("cannot score an empty bank")
    eps = bank.system.epsilon if epsilon is None else epsilon
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim == 2:
        samples = samples[None]
    w, _ = _importance(bank.costs, bank.mats, samples, eps)
    return w


def importance_samples(dim: int, cfg: PruneConfig, symmetries=None) -> np.ndarray:
    """Random samples (orbit-expanded when requested) followed by the targets."""
    samples = sample_unitaries(dim, cfg.sample_count, cfg.seed)
    if cfg.symmetrize and symmetries is not None and len(symmetries) > 1:
        sym = np.asarray(symmetries)
        samples = (sym[None] @ samples[:, None] @ np.conj(np.swapaxes(sym, -1, -2))[None]).reshape(-1, dim, dim)
    if cfg.targets is not None and len(cfg.targets):
        samples = np.concatenate([samples, np.asarray(cfg.targets, dtype=complex)])
    return samples


def select_survivors(costs, mats, epsilon, cfg: PruneConfig, zero_chain: int = -1, symmetries=None):
    """Indices (ascending) of the atoms kept by ``cfg``, plus removal counts."""
    n = len(costs)
    counts = {"dominated": 0, "capped": 0}
    idx = np.arange(n)
    if not cfg.enabled or n == 0:
        return idx, counts
    protect = zero_chain if cfg.protect_zero_chain else -1
    mask = dominated_mask(costs, mats, epsilon, protect=protect)
    counts["dominated"] = int(mask.sum())
    idx = idx[~mask]
    if not cfg.capped or len(idx) <= cfg.cap:
        return idx, counts

    samples = importance_samples(mats.shape[-1], cfg, symmetries)
    w, winners = _importance(costs[idx], mats[idx], samples, epsilon)
    local_zero = -1
    if protect >= 0:
        hit = np.flatnonzero(idx == protect)
        local_zero = int(hit[0]) if hit.size else -1
    # priority: zero chain, then per-sample winners, then the rest; by score within each tier
    tier = np.full(len(idx), 2)
    tier[np.unique(winners)] = 1
    if local_zero >= 0:
        tier[local_zero] = 0
    order = np.lexsort((np.arange(len(idx)), -w, tier))
    chosen = np.sort(order[: cfg.cap])
    counts["capped"] = len(idx) - len(chosen)
    return idx[chosen], counts


def prune_bank(bank, cfg: PruneConfig, epsilon: float | None = None):
    """Return a pruned copy of ``bank`` (duplicates, dominated atoms, then the cap)."""
    if not cfg.enabled:
        return bank
    eps = bank.system.epsilon if epsilon is None else epsilon
    if cfg.dedupe:
        bank = bank.subset(dedupe_indices(bank.costs, bank.mats))
    keep, _ = select_survivors(
        bank.costs, bank.mats, eps, cfg, zero_chain=bank.zero_chain, symmetries=bank.cset.symmetries
    )
    return bank.subset(keep)
