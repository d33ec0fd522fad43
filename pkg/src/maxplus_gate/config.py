"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored; unknown keys are rejected.
See ``KEYS`` for the schema and defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .model import ControlSystem, build_su2_example, build_su4_example, build_system, DEFAULT_EPSILON
from .pruning import DOMINANCE_ONLY, DOMINANCE_PLUS_CAP, PruneConfig
from .slices import SliceSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config"]


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _labels(text: str) -> tuple:
    return tuple(x.strip().upper() for x in text.split(",") if x.strip())


def _ratio(text: str) -> float:
    num, sep, den = text.partition("/")
    return float(num) / float(den) if sep else float(num)


_ANGLE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/(\d+\.?\d*))?$")


def _angle(text: str) -> float:
    """A float, or a multiple of pi such as ``pi``, ``-pi/2`` or ``0.5*pi``."""
    t = text.strip().lower().replace(" ", "")
    m = _ANGLE.match(t)
    if not m:
        return float(t)
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    return coef * np.pi / (float(m.group(2)) if m.group(2) else 1.0)


KEYS = {
    "system": str,
    "hamiltonians": _labels,
    "two_body": str,
    "r_ratio": _ratio,
    "R": _floats,
    "tau": float,
    "n_steps": int,
    "epsilon": float,
    "signed": _bool,
    "prune": _bool,
    "prune_mode": str,
    "cap": int,
    "samples": int,
    "seed": int,
    "protect_zero_chain": _bool,
    "dedupe": _bool,
    "symmetrize": _bool,
    "eval_union": _bool,
    "bank": str,
    "slice_gen1": str,
    "slice_gen2": str,
    "slice_range": _angle,
    "slice_resolution": int,
    "slice_csv": str,
    "slice_in_samples": _bool,
    "penalty_tol": float,
    "oracle_points": int,
    "oracle_cap": int,
    "oracle_limit": int,
}


@dataclass
class RunConfig:
    system: str = "su4"
    hamiltonians: tuple = ()
    two_body: str = "XZ"
    r_ratio: float = 1 / 1.3
    R: tuple = ()
    tau: float = 0.2
    n_steps: int | None = None
    epsilon: float = DEFAULT_EPSILON
    signed: bool = True
    prune: bool = True
    prune_mode: str = DOMINANCE_PLUS_CAP
    cap: int = 5000
    samples: int = 128
    seed: int = 0
    protect_zero_chain: bool = True
    dedupe: bool = True
    symmetrize: bool = True
    eval_union: bool = False
    bank: str = "bank.mpb"
    slice_gen1: str = "XX"
    slice_gen2: str = "YY"
    slice_range: float = np.pi
    slice_resolution: int = 41
    slice_csv: str = "slice.csv"
    slice_in_samples: bool = True
    penalty_tol: float = 1e-6
    oracle_points: int = 100
    oracle_cap: int = 50
    oracle_limit: int = 10**7

    def updated(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def build_system(self) -> ControlSystem:
        """Construct and validate the control system described by this config."""
        try:
            name = self.system.lower()
            if name == "su2":
                sys = build_su2_example(self.tau, 6 if self.n_steps is None else self.n_steps, self.epsilon)
            elif name == "su4":
                sys = build_su4_example(
                    self.r_ratio,
                    self.two_body,
                    self.tau,
                    20 if self.n_steps is None else self.n_steps,
                    self.epsilon,
                )
            elif name == "custom":
                if not self.hamiltonians:
                    raise ValueError("system = custom needs a hamiltonians list")
                R = self.R or (1.0,) * len(self.hamiltonians)
                sys = build_system(self.hamiltonians, R, self.tau, 20 if self.n_steps is None else self.n_steps, self.epsilon)
            else:
                raise ValueError(f"unknown system {self.system!r}; expected su2, su4 or custom")
            if self.hamiltonians and name != "custom":
                sys = build_system(self.hamiltonians, self.R or sys.R, sys.tau, sys.n_steps, sys.epsilon)
            elif self.R:
                sys = sys.replace(R=self.R)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return sys

    def slice_spec(self) -> SliceSpec:
        try:
            return SliceSpec.from_labels(self.slice_gen1, self.slice_gen2, self.slice_range, self.slice_resolution)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def prune_config(self, targets=None) -> PruneConfig:
        try:
            mode = {"dominance": DOMINANCE_ONLY, "dominance+cap": DOMINANCE_PLUS_CAP, "cap": DOMINANCE_PLUS_CAP}[
                self.prune_mode.lower()
            ]
        except KeyError:
            raise ConfigError(f"unknown prune_mode {self.prune_mode!r}") from None
        try:
            return PruneConfig(
                enabled=self.prune,
                mode=mode,
                cap=self.cap,
                sample_count=self.samples,
                seed=self.seed,
                protect_zero_chain=self.protect_zero_chain,
                dedupe=self.dedupe,
                symmetrize=self.symmetrize,
                targets=targets,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    cfg = base or RunConfig()
    return replace(cfg, **values)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
