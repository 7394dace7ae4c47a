"""Run configuration: a flat ``key = value`` file plus command-line overrides.

Example file::

    # cos_sum sweep
    problem = cos_sum
    dim = 10
    x0 = standard            # or random:SEED:SCALE
    T = logspace:2:4:5       # or 100, 316.2, 1000
    alpha = auto             # or a number; required when L2 == 0
    h = auto                 # or a number
    method = RK4
    stride = 100
    out = results
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigError, ContractViolation, DegenerateScheduleError
from ..hb_ode import Method
from ..problems import PROBLEM_NAMES, make_problem

DEFAULT_SEED = 20240607


def sampling_seed():
    """Seed for random sampling; the ``HBODE_SEED`` environment variable wins."""
    raw = os.environ.get("HBODE_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"HBODE_SEED must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    problem: str = "cos_sum"
    dim: int = 10
    x0_spec: Tuple = ("standard",)
    T_grid: Tuple[float, ...] = (1000.0,)
    alpha_override: Optional[float] = None
    h_rule: object = "auto"
    method: Method = Method.RK4
    checkpoint_stride: int = 100
    output_dir: str = "out"
    workers: int = 1

    def __post_init__(self):
        if self.problem not in PROBLEM_NAMES:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if int(self.dim) < 1:
            raise ConfigError("dim must be positive")
        grid = tuple(float(T) for T in self.T_grid)
        if not grid:
            raise ConfigError("T grid is empty")
        if any(not T > 0 for T in grid):
            raise ConfigError("horizons must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("T grid must be strictly increasing")
        object.__setattr__(self, "T_grid", grid)
        if self.alpha_override is not None and not self.alpha_override > 0:
            raise ConfigError("alpha must be positive")
        if self.h_rule != "auto" and not float(self.h_rule) > 0:
            raise ConfigError("h must be positive")
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise ConfigError(f"unknown method {self.method!r}") from None
        if int(self.checkpoint_stride) < 1:
            raise ConfigError("stride must be a positive integer")
        if int(self.workers) < 1:
            raise ConfigError("workers must be a positive integer")

    def build_problem(self):
        kind = self.x0_spec[0]
        x0 = None
        if kind == "random":
            _, seed, scale = self.x0_spec
            x0 = np.random.default_rng(seed).uniform(-scale, scale, self.dim)
        try:
            p = make_problem(self.problem, self.dim, x0=x0)
        except ContractViolation as exc:
            raise ConfigError(str(exc)) from None
        if p.L2 == 0 and self.alpha_override is None:
            raise DegenerateScheduleError(
                f"{p.name} has L2 = 0, so the friction schedule degenerates; "
                "set alpha explicitly")
        return p

    def with_T(self, T):
        return dataclasses.replace(self, T_grid=(float(T),))


def parse_T_grid(text):
    """``"100, 1000"`` or ``"logspace:2:4:5"`` (five points from 1e2 to 1e4)."""
    text = str(text).strip()
    if text.startswith("logspace:"):
        try:
            _, a, b, n = text.split(":")
            return tuple(float(v) for v in np.logspace(float(a), float(b), int(n)))
        except ValueError:
            raise ConfigError(f"bad logspace spec {text!r}") from None
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad T grid {text!r}") from None


def parse_x0(text):
    text = str(text).strip()
    if text == "standard":
        return ("standard",)
    if text.startswith("random:"):
        try:
            _, seed, scale = text.split(":")
            return ("random", int(seed), float(scale))
        except ValueError:
            pass
    raise ConfigError(f"x0 must be 'standard' or 'random:SEED:SCALE', got {text!r}")


def _optional_float(text):
    text = str(text).strip()
    return None if text in ("", "auto", "none") else float(text)


_PARSERS = {
    "problem": ("problem", str),
    "dim": ("dim", int),
    "x0": ("x0_spec", parse_x0),
    "T": ("T_grid", parse_T_grid),
    "alpha": ("alpha_override", _optional_float),
    "h": ("h_rule", lambda s: "auto" if str(s).strip() == "auto" else float(s)),
    "method": ("method", str),
    "stride": ("checkpoint_stride", int),
    "out": ("output_dir", str),
    "workers": ("workers", int),
}


def parse_items(items):
    """Map raw ``key -> string`` pairs onto :class:`RunConfig` field values."""
    fields = {}
    for key, raw in items.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        name, conv = _PARSERS[key]
        try:
            fields[name] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
    return fields


def read_config_file(path):
    items = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            items[key] = value
    return items


def load_config(path=None, overrides=None):
    """Config from ``path`` (optional) with ``overrides`` (raw strings) on top."""
    items = read_config_file(path) if path else {}
    items.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**parse_items(items))
