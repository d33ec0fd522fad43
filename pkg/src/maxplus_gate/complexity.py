"""Operation counts for the bank method versus a mesh over the group."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

__all__ = ["ComplexityReport", "complexity_report"]


@dataclass(frozen=True)
class ComplexityReport:
    n_qubits: int
    card: int
    n_steps: int
    grid_points_per_dim: int
    iterations: int
    seconds_per_point: float

    @property
    def group_dimension(self) -> int:
        return 4**self.n_qubits - 1

    @property
    def sequences(self) -> int:
        """Unpruned bank size after ``n_steps`` steps."""
        return self.card**self.n_steps

    @property
    def grid_states(self) -> int:
        return self.grid_points_per_dim**self.group_dimension

    @property
    def grid_work(self) -> int:
        """Mesh cost with one sweep per mesh spacing, ``G^(4^n - 1) * G``."""
        return self.grid_states * self.grid_points_per_dim

    @property
    def grid_hours(self) -> Decimal:
        """Wall time of ``iterations`` value-iteration sweeps over the mesh."""
        secs = Decimal(self.grid_states) * self.iterations * Decimal(repr(self.seconds_per_point))
        return secs / 3600

    def __str__(self):
        return "\n".join(
            [
                f"qubits n = {self.n_qubits}, group dimension 4^n - 1 = {self.group_dimension}",
                f"bank method without pruning: {self.card}^{self.n_steps} = {self.sequences} sequences",
                f"mesh with {self.grid_points_per_dim} points per dimension: "
                f"{self.grid_points_per_dim}^{self.group_dimension} = {self.grid_states} states",
                f"mesh work G^(4^n-1) * G = {self.grid_work}",
                f"mesh time for {self.iterations} sweeps at {self.seconds_per_point:g} s/point: "
                f"{self.grid_hours:.3E} hours",
            ]
        )


def complexity_report(
    n_qubits: int,
    card: int,
    n_steps: int,
    grid_points_per_dim: int = 50,
    iterations: int | None = None,
    seconds_per_point: float = 1e-4,
) -> ComplexityReport:
    """Counts for an ``n_qubits`` system with a control set of size ``card``.

    ``iterations`` defaults to ``n_steps``.
    """
    if n_qubits < 1 or card < 1 or n_steps < 0 or grid_points_per_dim < 1:
        raise ValueError("counts must be positive")
    return ComplexityReport(
        n_qubits,
        card,
        n_steps,
        grid_points_per_dim,
        n_steps if iterations is None else iterations,
        seconds_per_point,
    )
