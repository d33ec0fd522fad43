"""Max-plus bank solver for optimal gate synthesis on SU(2^n).

The value function of the relaxed fixed-horizon control problem is kept as
a minimum over cost atoms ``(c, A)``, one per surviving control sequence,
and is evaluated pointwise without any mesh over the group.
"""

from .dp import (
    Bank,
    CostAtom,
    evaluate_many,
    evaluate_value,
    extend_atom,
    extract_sequence,
    feasible,
    init_bank,
    propagate_step,
    solve,
)
from .linalg import expm_skew, hermitian_eig, kron, nuclear_norm, pauli, pauli_string, random_unitary
from .model import (
    ControlAction,
    ControlSystem,
    build_su2_example,
    build_su4_example,
    build_system,
    control_set,
    running_cost,
    terminal_penalty,
)
from .pruning import DOMINANCE_ONLY, DOMINANCE_PLUS_CAP, PruneConfig, dominates, estimate_importance, prune_bank

__version__ = "0.1.0"
