"""Parameter declarations for define-by-run search spaces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

KINDS = ("float_uniform", "float_log_uniform", "int_uniform", "categorical")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    low: Optional[float] = None
    high: Optional[float] = None
    choices: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.choices:
                raise ValueError(f"{self.name}: choices must be non-empty")
            choices = tuple(_freeze(c) for c in self.choices)
            if len(set(choices)) != len(choices):
                raise ValueError(f"{self.name}: choices must be unique")
            object.__setattr__(self, "choices", choices)
        else:
            if self.low is None or self.high is None or not self.low < self.high:
                raise ValueError(f"{self.name}: need low < high")
            if self.kind == "float_log_uniform" and self.low <= 0:
                raise ValueError(f"{self.name}: log-uniform bounds must be positive")
            if self.kind == "int_uniform":
                object.__setattr__(self, "low", int(self.low))
                object.__setattr__(self, "high", int(self.high))

    # internal (continuous) coordinates used by the samplers
    @property
    def is_log(self) -> bool:
        return self.kind == "float_log_uniform"

    def internal_bounds(self):
        if self.is_log:
            return math.log(self.low), math.log(self.high)
        return float(self.low), float(self.high)

    def to_internal(self, value) -> float:
        return math.log(value) if self.is_log else float(value)

    def from_internal(self, x: float):
        lo, hi = self.internal_bounds()
        x = min(max(x, lo), hi)
        if self.is_log:
            return min(max(math.exp(x), self.low), self.high)
        if self.kind == "int_uniform":
            return int(min(max(round(x), self.low), self.high))
        return float(x)

    def sample_uniform(self, rng: np.random.Generator):
        if self.kind == "categorical":
            return self.choices[int(rng.integers(len(self.choices)))]
        if self.kind == "int_uniform":
            return int(rng.integers(self.low, self.high + 1))
        lo, hi = self.internal_bounds()
        return self.from_internal(float(rng.uniform(lo, hi)))

    def contains(self, value: Any) -> bool:
        if self.kind == "categorical":
            return _freeze(value) in self.choices
        return self.low <= value <= self.high

    def to_dict(self):
        d = {"name": self.name, "kind": self.kind}
        if self.kind == "categorical":
            d["choices"] = [list(c) if isinstance(c, tuple) else c for c in self.choices]
        else:
            d["low"], d["high"] = self.low, self.high
        return d

    @classmethod
    def from_dict(cls, d):
        choices = d.get("choices")
        return cls(
            d["name"], d["kind"], d.get("low"), d.get("high"),
            tuple(choices) if choices is not None else None,
        )


def _freeze(value):
    # list-valued choices (layer widths) need to be hashable
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def load_space(items) -> list:
    """Parse a list of spec dicts (the search-space file format)."""
    specs = [ParamSpec.from_dict(d) for d in items]
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("duplicate parameter names in search space")
    return specs
