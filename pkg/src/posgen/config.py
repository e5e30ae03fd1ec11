"""Run configuration shared by the report engine and the CLI."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

DEFAULT_TOLERANCES = {
    "predicate": 1e-9,  # map-level verdicts (positivity, unitality, symmetry)
    "consistency": 1e-4,  # mixed-sign detection across equivalent conditions
    "trace": 1e-6,  # two-sided trace-preservation test
}

FORMATS = ("json", "text")


def subseed(*parts) -> int:
    """Deterministic substream seed from a tuple of integers."""
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


@dataclass(frozen=True)
class RunConfig:
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    n_selfadjoint: int = 50
    n_unitary: int = 50
    n_states: int = 50
    t_grid: tuple = (0.1, 1.0, 10.0)
    s_grid: tuple = (0.5, 1.0, 2.0)
    trace_t_grid: tuple = (0.5, 1.0, 2.0)
    lambda_multipliers: tuple = (1.0, 10.0, 100.0)
    seed: int = 0
    format: str = "json"
    jobs: int = 1

    def __post_init__(self):
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances)
        unknown = merged.keys() - DEFAULT_TOLERANCES.keys()
        if unknown:
            raise SchemaError(f"unknown tolerance name(s): {sorted(unknown)}")
        if any(v <= 0 for v in merged.values()):
            raise SchemaError("all tolerances must be positive")
        object.__setattr__(self, "tolerances", merged)
        for name in ("t_grid", "s_grid", "trace_t_grid", "lambda_multipliers"):
            grid = tuple(float(v) for v in getattr(self, name))
            if not grid:
                raise SchemaError(f"{name} must be non-empty")
            object.__setattr__(self, name, grid)
        if min(self.t_grid) < 0 or min(self.s_grid) < 0 or min(self.trace_t_grid) < 0:
            raise SchemaError("time grids must be nonnegative")
        if min(self.lambda_multipliers) <= 0:
            raise SchemaError("lambda multipliers must be positive")
        for name in ("n_selfadjoint", "n_unitary", "n_states"):
            if getattr(self, name) < 0:
                raise SchemaError(f"{name} must be >= 0")
        if self.format not in FORMATS:
            raise SchemaError(f"format must be one of {FORMATS}")
        if self.jobs < 1:
            raise SchemaError("jobs must be >= 1")

    def tol(self, name: str) -> float:
        if name not in self.tolerances:
            raise KeyError(f"no tolerance named {name!r}")
        return self.tolerances[name]

    def replace(self, **kwargs) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)

    def to_json(self) -> dict:
        return {
            "tolerances": {k: float(v) for k, v in sorted(self.tolerances.items())},
            "n_selfadjoint": self.n_selfadjoint,
            "n_unitary": self.n_unitary,
            "n_states": self.n_states,
            "t_grid": list(self.t_grid),
            "s_grid": list(self.s_grid),
            "trace_t_grid": list(self.trace_t_grid),
            "lambda_multipliers": list(self.lambda_multipliers),
            "seed": self.seed,
            "format": self.format,
            "jobs": self.jobs,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RunConfig":
        if not isinstance(payload, dict):
            raise SchemaError("config payload must be an object")
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = payload.keys() - fields
        if unknown:
            raise SchemaError(f"config has unknown field(s): {sorted(unknown)}")
        kwargs = dict(payload)
        for name in ("t_grid", "s_grid", "trace_t_grid", "lambda_multipliers"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)
