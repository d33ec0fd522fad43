"""Two-dimensional slices of the value function through the exponential map."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .dp import Bank, evaluate_value
from .linalg import HERMITIAN_TOL, expm_skew, hermitian_residual, pauli_string

__all__ = ["SliceSpec", "compute_slice", "slice_csv", "write_slice_csv"]


@dataclass(frozen=True, eq=False)
class SliceSpec:
    """Grid over the plane ``a * gen1 + b * gen2`` of Hermitian generators.

    Grid point ``(a, b)`` maps to ``U = exp(-i (a gen1 + b gen2))``.
    Coordinates run over ``[-rho, rho]`` with ``resolution`` points per axis.
    """

    gen1: np.ndarray
    gen2: np.ndarray
    rho: float = np.pi
    resolution: int = 41
    label1: str = "gen1"
    label2: str = "gen2"

    def __post_init__(self):
        for name in ("gen1", "gen2"):
            g = np.asarray(getattr(self, name), dtype=complex)
            if hermitian_residual(g) > HERMITIAN_TOL or abs(np.trace(g)) > HERMITIAN_TOL:
                raise ValueError(f"{name} must be Hermitian and traceless")
            object.__setattr__(self, name, g)
        if self.gen1.shape != self.gen2.shape:
            raise ValueError("slice generators have different shapes")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @classmethod
    def from_labels(cls, label1: str, label2: str, rho=np.pi, resolution=41) -> "SliceSpec":
        return cls(pauli_string(label1), pauli_string(label2), rho, resolution, label1.upper(), label2.upper())

    @property
    def dim(self) -> int:
        return self.gen1.shape[0]

    def axis(self) -> np.ndarray:
        # exact rational grid so shared points of different resolutions coincide bit-for-bit
        i = np.arange(self.resolution)
        return self.rho * ((2.0 * i) / (self.resolution - 1) - 1.0)

    def points(self) -> np.ndarray:
        """``(a, b)`` pairs with b as the slow index."""
        ax = self.axis()
        b, a = np.meshgrid(ax, ax, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])

    def unitary(self, a: float, b: float) -> np.ndarray:
        return expm_skew(a * self.gen1 + b * self.gen2, 1.0)

    def targets(self) -> np.ndarray:
        return np.array([self.unitary(a, b) for a, b in self.points()])


def compute_slice(bank: Bank, spec: SliceSpec, epsilon=None, union=False) -> np.ndarray:
    """Rows ``(a, b, V)`` in the order of :meth:`SliceSpec.points`."""
    if spec.dim != bank.dim:
        raise ValueError(f"slice generators are {spec.dim}x{spec.dim} but the bank is {bank.dim}x{bank.dim}")
    pts = spec.points()
    vals = np.array([evaluate_value(bank, spec.unitary(a, b), epsilon, union)[0] for a, b in pts])
    return np.column_stack([pts, vals])


def slice_csv(rows) -> str:
    out = io.StringIO()
    out.write("a,b,V\n")
    for a, b, v in rows:
        out.write(f"{float(a)!r},{float(b)!r},{float(v)!r}\n")
    return out.getvalue()


def write_slice_csv(rows, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(slice_csv(rows))


def slice_grid(rows, resolution: int) -> np.ndarray:
    """Reshape CSV rows into a ``(b, a)`` value grid."""
    return np.asarray(rows)[:, 2].reshape(resolution, resolution)
