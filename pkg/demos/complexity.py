"""Why a mesh over the group is hopeless and a bank is not.

A mesh with G points per dimension over SU(2^n) has G^(4^n - 1) nodes.  The
bank grows like (2M + 1)^N before pruning, independent of the group
dimension, and pruning keeps it at a fixed size.

    python3 demos/complexity.py
"""

from maxplus_gate.complexity import complexity_report

print(complexity_report(2, 11, 20, 50, iterations=20, seconds_per_point=1e-4))
print()
print(f"{'n':>2} {'dim':>4} {'mesh states (G=10)':>22} {'unpruned bank (N=10)':>22}")
for n in (1, 2, 3):
    M = 2 * n + (n - 1)  # sigma_x, sigma_z on each qubit plus a chain of couplings
    rep = complexity_report(n, 2 * M + 1, 10, 10)
    print(f"{n:>2} {rep.group_dimension:>4} {rep.grid_states:>22.3e} {rep.sequences:>22.3e}")
print("\nWith a cap of 5000 atoms per step the two-qubit solve touches 5000 x 11 candidates")
print("per step, about 1.1e6 over twenty steps.")
