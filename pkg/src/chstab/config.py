"""Run configuration: a flat ``key = value`` text file, overridable from the command line.

Grammar: one ``key = value`` per line; blank lines and text after ``#`` are
ignored; keys are the :class:`RunConfig` field names; unknown keys are errors.
Booleans accept ``true/false/1/0/yes/no``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scheme: str = "spectral"  # spectral | graph
    dim: int = 1
    points_per_dim: int = 128
    bc: str = "periodic"  # graph scheme only: periodic | dirichlet
    nu: float = 0.001
    tau: float = 0.01
    A: float = 0.0
    steps: int = 200
    seed: int = 0
    initial: str = "random"  # random | cosine | zero | file:<path>
    snapshot_stride: int = 0  # 0 disables snapshots
    output_dir: str = "out"
    dealias: bool = False

    def __post_init__(self):
        if self.scheme not in ("spectral", "graph"):
            raise ConfigError(f"scheme must be 'spectral' or 'graph', got {self.scheme!r}")
        if self.dim not in (1, 2, 3):
            raise ConfigError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.points_per_dim < 2:
            raise ConfigError("points_per_dim must be >= 2")
        if self.bc not in ("periodic", "dirichlet"):
            raise ConfigError(f"bc must be 'periodic' or 'dirichlet', got {self.bc!r}")
        if self.scheme == "spectral" and self.bc != "periodic":
            raise ConfigError("the spectral scheme is periodic only")
        if self.scheme == "graph" and (self.dim == 3 or (self.dim == 2 and self.bc != "periodic")):
            raise ConfigError("graph scheme supports 1D periodic/dirichlet and 2D periodic grids")
        for name in ("nu", "tau"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.A) and self.A >= 0):
            raise ConfigError(f"A must be nonnegative, got {self.A}")
        if self.steps < 0 or self.snapshot_stride < 0 or self.seed < 0:
            raise ConfigError("steps, snapshot_stride and seed must be nonnegative")
        if self.initial not in ("random", "cosine", "zero") and not self.initial.startswith("file:"):
            raise ConfigError(f"unknown initial condition {self.initial!r}")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values = parse_config(Path(path).read_text()) if path else {}
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _convert(key, raw) if isinstance(raw, str) else raw
    return RunConfig(**values)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 (O'Neill's permuted congruential generator, 128-bit state) seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))
