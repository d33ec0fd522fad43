"""Command-line front end: ``maxplus-gate {solve,eval,feasible,slice,oracle,complexity}``.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure,
3 resource limit.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from .bankfile import BankFormatError, load_bank, save_bank
from .complexity import complexity_report
from .config import ConfigError, RunConfig, _angle, load_config
from .dp import evaluate_value, extract_sequence, feasible, init_bank, propagate_step
from .linalg import LinAlgError, NotHermitianError, expm_skew, pauli_string, unitarity_residual
from .model import control_set
from .oracle import OracleLimitError, compare
from .slices import compute_slice, write_slice_csv

log = logging.getLogger("maxplus_gate")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_RESOURCE = 0, 1, 2, 3
TARGET_UNITARITY_TOL = 1e-6


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "no_prune", False):
        overrides["prune"] = False
    if getattr(args, "cap", None) is not None:
        overrides["cap"] = args.cap
    if getattr(args, "samples", None) is not None:
        overrides["samples"] = args.samples
    if getattr(args, "unsigned_controls", False):
        overrides["signed"] = False
    if getattr(args, "eval_union", False):
        overrides["eval_union"] = True
    return cfg.updated(**overrides)


def parse_target(text: str, dim: int) -> np.ndarray:
    """``"XX=0.5,YY=pi/4"`` means ``exp(-i (0.5 XX + pi/4 YY))``; ``"I"`` is the identity."""
    if text.strip().upper() in ("I", "IDENTITY"):
        return np.eye(dim, dtype=complex)
    gen = np.zeros((dim, dim), dtype=complex)
    for term in text.split(","):
        label, sep, angle = term.partition("=")
        if not sep:
            raise ConfigError(f"bad target term {term!r}; expected LABEL=ANGLE")
        try:
            g = pauli_string(label.strip().upper())
            coef = _angle(angle)
        except ValueError as exc:
            raise ConfigError(f"bad target term {term!r}: {exc}") from None
        if g.shape != (dim, dim):
            raise ConfigError(f"target generator {label} is {g.shape[0]}x{g.shape[0]}, bank is {dim}x{dim}")
        gen += coef * g
    return expm_skew(gen, 1.0)


def _load_target(args, dim) -> np.ndarray:
    if args.target_file:
        try:
            u = np.loadtxt(args.target_file, dtype=complex, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read target matrix {args.target_file}: {exc}") from None
    elif args.target:
        u = parse_target(args.target, dim)
    else:
        raise ConfigError("give --target or --target-file")
    if u.shape != (dim, dim):
        raise ConfigError(f"target is {u.shape}, bank is {dim}x{dim}")
    res = unitarity_residual(u)
    if res > TARGET_UNITARITY_TOL:
        raise ConfigError(f"target is not unitary: ||U^H U - I||_F = {res:.3e}")
    return u


def cmd_solve(args) -> int:
    cfg = _config(args)
    system = cfg.build_system()
    cset = control_set(system, signed=cfg.signed)
    targets = cfg.slice_spec().targets() if (cfg.slice_in_samples and cfg.slice_spec().dim == system.dim) else None
    prune = cfg.prune_config(targets)
    out = args.out or cfg.bank
    t0 = time.perf_counter()
    bank = init_bank(system, cset, keep_snapshots=cfg.eval_union)
    for _ in range(system.n_steps):
        bank = propagate_step(bank, prune)
        print(bank.stats[-1].line(), file=sys.stderr, flush=True)
    save_bank(bank, out)
    print(f"solved {system.n_steps} steps in {time.perf_counter() - t0:.1f}s; {len(bank)} atoms -> {out}", file=sys.stderr)
    return EXIT_OK


def _format_sequence(seq, labels) -> str:
    return " ".join(a.label(labels) for a in seq) if seq else "(empty)"


def cmd_eval(args) -> int:
    bank = load_bank(args.bank)
    u = _load_target(args, bank.dim)
    value, atom_id = evaluate_value(bank, u, union=args.eval_union)
    seq = extract_sequence(bank, atom_id)
    feas = feasible(bank, u, args.tol, union=args.eval_union)
    A = bank.snapshots[atom_id[0]][1][atom_id[1]] if isinstance(atom_id, tuple) else bank.mats[atom_id]
    residual = max(2.0 * bank.dim - 2.0 * float(np.trace(A @ u).real), 0.0)
    print(f"value: {value!r}")
    print(f"sequence: {_format_sequence(seq, bank.system.labels)}")
    print(f"terminal residual: {residual!r}")
    print(f"feasible at tol {args.tol:g}: {'yes' if feas.feasible else 'no'} (best residual {feas.residual!r})")
    return EXIT_OK


def cmd_feasible(args) -> int:
    bank = load_bank(args.bank)
    u = _load_target(args, bank.dim)
    feas = feasible(bank, u, args.tol, union=args.eval_union)
    seq = extract_sequence(bank, feas.atom_id)
    print(f"feasible: {'yes' if feas.feasible else 'no'}")
    print(f"residual: {feas.residual!r}")
    print(f"value: {feas.value!r}")
    print(f"sequence: {_format_sequence(seq, bank.system.labels)}")
    return EXIT_OK


def cmd_slice(args) -> int:
    bank = load_bank(args.bank)
    cfg = _config(args)
    cfg = cfg.updated(
        slice_gen1=args.gen1,
        slice_gen2=args.gen2,
        slice_range=_angle(args.range) if args.range else None,
        slice_resolution=args.resolution,
    )
    spec = cfg.slice_spec()
    if spec.dim != bank.dim:
        raise ConfigError(f"slice generators are {spec.dim}x{spec.dim}, bank is {bank.dim}x{bank.dim}")
    rows = compute_slice(bank, spec, union=cfg.eval_union)
    out = args.out or cfg.slice_csv
    write_slice_csv(rows, out)
    print(f"wrote {len(rows)} points to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _config(args)
    if not args.config:
        cfg = cfg.updated(system="su2")
    system = cfg.build_system()
    cset = control_set(system, signed=cfg.signed)
    if len(cset) ** system.n_steps > cfg.oracle_limit:
        raise OracleLimitError(
            f"{len(cset)}^{system.n_steps} sequences exceeds the oracle limit {cfg.oracle_limit}; use a smaller n_steps"
        )
    report = compare(
        system,
        cset,
        system.n_steps,
        args.points or cfg.oracle_points,
        cfg.seed,
        cap=cfg.oracle_cap if args.cap is None else args.cap,
        samples=cfg.samples,
    )
    print(report)
    return EXIT_OK


def cmd_complexity(args) -> int:
    if args.headline:
        rep = complexity_report(2, 11, 20, 50, iterations=20, seconds_per_point=1e-4)
    else:
        cfg = _config(args)
        system = cfg.build_system()
        card = len(control_set(system, signed=cfg.signed))
        rep = complexity_report(system.n_qubits, card, system.n_steps, args.grid, seconds_per_point=args.seconds_per_point)
    print(rep)
    return EXIT_OK


def _add_common(p, bank=False, target=False):
    p.add_argument("--config", metavar="PATH", help="key = value run configuration")
    p.add_argument("--seed", type=int)
    if bank:
        p.add_argument("--bank", metavar="PATH", required=True)
        p.add_argument("--eval-union", action="store_true", help="minimise over the banks of every step")
    if target:
        p.add_argument("--target", help='generator expression, e.g. "XX=0.5,YY=pi/4", or "I"')
        p.add_argument("--target-file", metavar="PATH", help="text file holding a d x d complex matrix")
        p.add_argument("--tol", type=float, default=1e-6, help="terminal penalty tolerance for feasibility")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxplus-gate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="propagate a bank for the configured system")
    _add_common(p)
    p.add_argument("--out", metavar="PATH", help="bank file to write")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--cap", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--unsigned-controls", action="store_true")
    p.add_argument("--eval-union", action="store_true", help="store every step's bank for union evaluation")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="value, best sequence and residual at a target unitary")
    _add_common(p, bank=True, target=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("feasible", help="can the target be reached within the horizon")
    _add_common(p, bank=True, target=True)
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("slice", help="write a 2-D slice of the value function as CSV")
    _add_common(p, bank=True)
    p.add_argument("--gen1")
    p.add_argument("--gen2")
    p.add_argument("--range", help="half-width rho of the grid, e.g. pi or 0.5")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("oracle", help="cross-check the solver against exhaustive enumeration")
    _add_common(p)
    p.add_argument("--points", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--unsigned-controls", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("complexity", help="sequence counts versus mesh size")
    _add_common(p)
    p.add_argument("--grid", type=int, default=50, help="mesh points per dimension")
    p.add_argument("--seconds-per-point", type=float, default=1e-4)
    p.add_argument("--unsigned-controls", action="store_true")
    p.add_argument("--headline", action="store_true", help="two qubits, 50 points per dimension, 20 sweeps")
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, BankFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return EXIT_RESOURCE
    except (LinAlgError, NotHermitianError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
