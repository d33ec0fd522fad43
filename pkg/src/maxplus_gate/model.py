"""Control system, running cost, terminal penalty and the discretised control set."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HERMITIAN_TOL,
    expm_skew,
    hermitian_residual,
    pauli_string,
    unitarity_residual,
)

__all__ = [
    "ControlSystem",
    "ControlAction",
    "DiscretizedControlSet",
    "SU4_ONE_BODY",
    "control_set",
    "control_symmetries",
    "running_cost",
    "terminal_penalty",
    "build_su2_example",
    "build_su4_example",
    "build_system",
]

DEFAULT_EPSILON = 0.1
SU4_ONE_BODY = ("IX", "IZ", "XI", "ZI")


@dataclass(frozen=True, eq=False)
class ControlSystem:
    """Right-invariant control system ``dU/dt = -i (sum_k v_k H_k) U``.

    ``R`` holds the diagonal of the control weight matrix, one entry per
    Hamiltonian.  The horizon is ``n_steps * tau``; ``epsilon`` scales the
    terminal penalty as ``phi / epsilon``.
    """

    hamiltonians: tuple
    labels: tuple
    R: np.ndarray
    tau: float = 0.2
    n_steps: int = 20
    epsilon: float = DEFAULT_EPSILON
    n_qubits: int = field(init=False)

    def __post_init__(self):
        hams = tuple(np.array(h, dtype=complex) for h in self.hamiltonians)
        if not hams:
            raise ValueError("at least one control Hamiltonian is required")
        d = hams[0].shape[0]
        n = int(round(np.log2(d)))
        if 2**n != d:
            raise ValueError(f"matrix dimension {d} is not a power of two")
        labels = tuple(self.labels) if self.labels else tuple(f"H{k + 1}" for k in range(len(hams)))
        if len(labels) != len(hams):
            raise ValueError("need exactly one label per Hamiltonian")
        for lab, h in zip(labels, hams):
            if h.shape != (d, d):
                raise ValueError(f"Hamiltonian {lab} has shape {h.shape}, expected {(d, d)}")
            res = hermitian_residual(h)
            if res > HERMITIAN_TOL:
                raise ValueError(f"Hamiltonian {lab} is not Hermitian (residual {res:.3e})")
            if abs(np.trace(h)) > HERMITIAN_TOL:
                raise ValueError(f"Hamiltonian {lab} is not traceless (trace {np.trace(h):.3e})")
        R = np.array(self.R, dtype=float).reshape(-1)
        if R.shape != (len(hams),):
            raise ValueError(f"R has {R.size} entries for {len(hams)} Hamiltonians")
        if np.any(R <= 0) or not np.all(np.isfinite(R)):
            raise ValueError("R entries must be finite and strictly positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError("n_steps must be a non-negative integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        R.setflags(write=False)
        for h in hams:
            h.setflags(write=False)
        object.__setattr__(self, "hamiltonians", hams)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "n_qubits", n)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def M(self) -> int:
        return len(self.hamiltonians)

    @property
    def horizon(self) -> float:
        return self.n_steps * self.tau

    def replace(self, **changes) -> "ControlSystem":
        kwargs = dict(
            hamiltonians=self.hamiltonians,
            labels=self.labels,
            R=self.R,
            tau=self.tau,
            n_steps=self.n_steps,
            epsilon=self.epsilon,
        )
        kwargs.update(changes)
        return ControlSystem(**kwargs)


@dataclass(frozen=True)
class ControlAction:
    """A constant control over one step: zero, or ``sign * e_index`` (0-based)."""

    index: int | None = None
    sign: int = 0

    def __post_init__(self):
        if self.index is None:
            if self.sign != 0:
                raise ValueError("the zero action has no sign")
        elif self.sign not in (1, -1) or self.index < 0:
            raise ValueError(f"invalid axis action ({self.index}, {self.sign})")

    @classmethod
    def zero(cls) -> "ControlAction":
        return cls()

    @classmethod
    def axis(cls, index: int, sign: int = 1) -> "ControlAction":
        return cls(index, sign)

    @property
    def is_zero(self) -> bool:
        return self.index is None

    def label(self, labels=None) -> str:
        if self.is_zero:
            return "0"
        name = labels[self.index] if labels is not None else f"H{self.index + 1}"
        return ("+" if self.sign > 0 else "-") + name


@dataclass(frozen=True, eq=False)
class DiscretizedControlSet:
    """Piecewise-constant controls with at most one unit component per step.

    ``actions[i]`` acts over one step through ``propagators[i]`` at a cost of
    ``step_costs[i]``.  The zero action is always first.
    """

    actions: tuple
    propagators: np.ndarray
    step_costs: np.ndarray
    labels: tuple
    signed: bool = True
    symmetries: np.ndarray | None = None

    def __len__(self):
        return len(self.actions)

    def index(self, action: ControlAction) -> int:
        return self.actions.index(action)

    def describe(self) -> str:
        return ",".join(a.label(self.labels) for a in self.actions)


def _check_action(action: ControlAction, sys: ControlSystem):
    if not action.is_zero and action.index >= sys.M:
        raise IndexError(f"action index {action.index} out of range for {sys.M} Hamiltonians")


def running_cost(action: ControlAction, sys: ControlSystem) -> float:
    """Cost ``sqrt(v^T R v) * tau`` of holding ``action`` for one step."""
    _check_action(action, sys)
    if action.is_zero:
        return 0.0
    return float(np.sqrt(sys.R[action.index]) * sys.tau)


def terminal_penalty(u, sys: ControlSystem) -> float:
    """``tr[2I - u - u^H] = 2d - 2 Re tr(u)``; zero only at the identity."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (sys.dim, sys.dim):
        raise ValueError(f"expected a {sys.dim}x{sys.dim} unitary, got shape {u.shape}")
    res = unitarity_residual(u)
    if res > 1e-8:
        raise ValueError(f"matrix is not unitary (residual {res:.3e})")
    return max(2.0 * sys.dim - 2.0 * float(np.trace(u).real), 0.0)


def control_set(sys: ControlSystem, signed: bool = True) -> DiscretizedControlSet:
    """Zero action followed by ``+e_k`` (and ``-e_k`` when ``signed``) for each k."""
    actions = [ControlAction.zero()]
    for k in range(sys.M):
        actions.append(ControlAction.axis(k, 1))
        if signed:
            actions.append(ControlAction.axis(k, -1))
    d = sys.dim
    props = np.empty((len(actions), d, d), dtype=complex)
    costs = np.empty(len(actions))
    for i, act in enumerate(actions):
        if act.is_zero:
            props[i] = np.eye(d)
        else:
            props[i] = expm_skew(sys.hamiltonians[act.index], act.sign * sys.tau)
        costs[i] = running_cost(act, sys)
    props.setflags(write=False)
    costs.setflags(write=False)
    return DiscretizedControlSet(tuple(actions), props, costs, sys.labels, signed, control_symmetries(sys, signed))


def control_symmetries(sys: ControlSystem, signed: bool = True, tol: float = 1e-12) -> np.ndarray:
    """Pauli strings ``P`` whose conjugation maps the control set onto itself.

    ``P H_k P^dagger`` must equal ``H_k`` (or ``-H_k`` when negative actions
    are available).  Each such ``P`` is a symmetry of the whole problem:
    the value function satisfies ``V(P U P^dagger) = V(U)``.  The identity is
    always first.
    """
    found = []
    for letters in itertools.product("IXYZ", repeat=sys.n_qubits):
        p = pauli_string("".join(letters))
        ok = True
        for h in sys.hamiltonians:
            g = p @ h @ p.conj().T
            if np.linalg.norm(g - h) <= tol:
                continue
            if signed and np.linalg.norm(g + h) <= tol:
                continue
            ok = False
            break
        if ok:
            found.append(p)
    return np.array(found)


def build_system(labels, R, tau=0.2, n_steps=20, epsilon=DEFAULT_EPSILON) -> ControlSystem:
    """Build a system from Pauli-string labels such as ``["IX", "XZ"]``."""
    labels = tuple(lab.strip().upper() for lab in labels)
    widths = {len(lab) for lab in labels}
    if len(widths) != 1:
        raise ValueError(f"Pauli strings of mixed length: {labels}")
    return ControlSystem(
        hamiltonians=tuple(pauli_string(lab) for lab in labels),
        labels=labels,
        R=R,
        tau=tau,
        n_steps=n_steps,
        epsilon=epsilon,
    )


def build_su2_example(tau=0.2, n_steps=6, epsilon=DEFAULT_EPSILON) -> ControlSystem:
    """Single qubit driven by sigma_x and sigma_z with unit weights."""
    return build_system(("X", "Z"), (1.0, 1.0), tau=tau, n_steps=n_steps, epsilon=epsilon)


def build_su4_example(
    r_ratio: float,
    two_body: str = "XZ",
    tau=0.2,
    n_steps=20,
    epsilon=DEFAULT_EPSILON,
) -> ControlSystem:
    """Two qubits: four one-body terms plus one two-body term.

    ``r_ratio`` is the ratio of one-body to two-body step cost; the two-body
    weight is set to ``1 / r_ratio**2`` because a step costs ``sqrt(R_k) * tau``.
    """
    if not 0 < r_ratio <= 1:
        raise ValueError("r_ratio must lie in (0, 1]")
    two_body = two_body.upper()
    if len(two_body) != 2 or "I" in two_body:
        raise ValueError(f"two-body term must be a two-qubit Pauli string without I, got {two_body!r}")
    R = (1.0, 1.0, 1.0, 1.0, 1.0 / r_ratio**2)
    return build_system(SU4_ONE_BODY + (two_body,), R, tau=tau, n_steps=n_steps, epsilon=epsilon)
