"""Two qubits: value-function slices on the sigma_x(x)sigma_x / sigma_y(x)sigma_y plane.

Solves the five-Hamiltonian two-qubit problem (20 steps of 0.2, cap 5000)
for two cost ratios r between one-body and two-body steps, then draws the
41x41 slices side by side.  Each solve takes a few minutes on one core.

    python3 demos/su4_slices.py [--two-body XX|XZ] [--cap 5000] [--out slices.png]

With the sigma_x(x)sigma_x coupling, XX rotations are cheap and YY ones are
not, so the level sets are long ellipses along the XX axis at r = 1/1.3
(V(0, pi/4) / V(pi/4, 0) is about 6.3).  Making the two-body step dearer
(r = 1/3) rounds them off (ratio about 3.3).
"""

import argparse
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maxplus_gate import build_su4_example, solve
from maxplus_gate.pruning import PruneConfig
from maxplus_gate.slices import SliceSpec, compute_slice, slice_grid, write_slice_csv

ap = argparse.ArgumentParser()
ap.add_argument("--two-body", default="XX")
ap.add_argument("--cap", type=int, default=5000)
ap.add_argument("--resolution", type=int, default=41)
ap.add_argument("--out", default="su4_slices.png")
args = ap.parse_args()

spec = SliceSpec.from_labels("XX", "YY", np.pi, args.resolution)
fig, axes = plt.subplots(1, 2, figsize=(11, 4.8), constrained_layout=True)
for ax, (label, r) in zip(axes, [("1/1.3", 1 / 1.3), ("1/3", 1 / 3)]):
    system = build_su4_example(r, args.two_body)
    cfg = PruneConfig(cap=args.cap, sample_count=128, targets=spec.targets())
    t0 = time.perf_counter()
    bank = solve(system, cfg)
    rows = compute_slice(bank, spec)
    write_slice_csv(rows, f"slice_{args.two_body}_r{label.replace('/', '_')}.csv")
    grid = slice_grid(rows, args.resolution)
    c, k = args.resolution // 2, args.resolution // 8
    print(
        f"r = {label}: {time.perf_counter() - t0:.0f}s, {len(bank)} atoms; "
        f"V(pi/4, 0) = {grid[c, c + k]:.3f}, V(0, pi/4) = {grid[c + k, c]:.3f}"
    )
    im = ax.imshow(grid, origin="lower", extent=[-np.pi, np.pi, -np.pi, np.pi], cmap="viridis")
    ax.contour(spec.axis(), spec.axis(), grid, levels=12, colors="w", linewidths=0.5)
    ax.set_title(f"r = {label}, two-body {args.two_body}")
    ax.set_xlabel("a  (XX)")
    ax.set_ylabel("b  (YY)")
    fig.colorbar(im, ax=ax, shrink=0.85)
fig.savefig(args.out, dpi=120)
print(f"wrote {args.out}")
