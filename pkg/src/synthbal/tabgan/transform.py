"""Per-column transforms between feature space and the GAN's working space."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from ..errors import ShapeMismatch

logger = logging.getLogger(__name__)

VARIANTS = ("vanilla", "copula")


@dataclass
class CopulaTransform:
    """Empirical-CDF / inverse-normal map, one quantile table per column.

    ``values[j]`` holds the sorted distinct values of column ``j`` and
    ``positions[j]`` their plotting positions ``(avg_rank - 0.5) / n``.
    """

    values: list
    positions: list
    constant: list = field(default_factory=list)

    kind = "copula"

    @classmethod
    def fit(cls, x: np.ndarray) -> "CopulaTransform":
        n = x.shape[0]
        values, positions, constant = [], [], []
        for j in range(x.shape[1]):
            col = x[:, j]
            ranks = rankdata(col, method="average")
            uniq, first = np.unique(col, return_index=True)
            values.append(uniq)
            positions.append((ranks[first] - 0.5) / n)
            if uniq.size == 1:
                constant.append(j)
        if constant:
            logger.warning("constant columns map to all-zero scores: %s", constant)
        return cls(values, positions, constant)

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=float)
        for j, (vals, pos) in enumerate(zip(self.values, self.positions)):
            if vals.size == 1:
                continue
            out[:, j] = ndtri(np.interp(x[:, j], vals, pos))
        return out

    def invert(self, z: np.ndarray) -> np.ndarray:
        out = np.empty_like(z, dtype=float)
        for j, (vals, pos) in enumerate(zip(self.values, self.positions)):
            # np.interp clamps to the end values outside the table.
            out[:, j] = np.interp(ndtr(z[:, j]), pos, vals)
        return out

    def to_dict(self):
        return {
            "kind": self.kind,
            "values": [v.tolist() for v in self.values],
            "positions": [p.tolist() for p in self.positions],
            "constant": list(self.constant),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [np.asarray(v, dtype=float) for v in d["values"]],
            [np.asarray(p, dtype=float) for p in d["positions"]],
            list(d.get("constant", [])),
        )


@dataclass
class Standardizer:
    """Per-column z-scoring; constant columns map to zero."""

    mean: np.ndarray
    std: np.ndarray
    constant: list = field(default_factory=list)

    kind = "vanilla"

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        constant = [int(j) for j in np.flatnonzero(std == 0)]
        if constant:
            logger.warning("constant columns map to all-zero scores: %s", constant)
        return cls(mean, std, constant)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / np.where(self.std > 0, self.std, 1.0)

    def invert(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean

    def to_dict(self):
        return {
            "kind": self.kind,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "constant": list(self.constant),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["mean"], dtype=float),
            np.asarray(d["std"], dtype=float),
            list(d.get("constant", [])),
        )


def fit_transform(x, variant: str = "copula"):
    """Fit the transform for ``variant`` on ``x`` and return ``(transform, z)``."""
    x = np.asarray(getattr(x, "features", x), dtype=float)
    if x.shape[0] < 2:
        raise ValueError("need at least 2 rows to fit a transform")
    if variant == "copula":
        tr = CopulaTransform.fit(x)
    elif variant == "vanilla":
        tr = Standardizer.fit(x)
    else:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return tr, tr.apply(x)


def invert_transform(transform, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    width = len(transform.values) if transform.kind == "copula" else transform.mean.size
    if z.ndim != 2 or z.shape[1] != width:
        raise ShapeMismatch(f"expected {width} columns, got shape {z.shape}")
    return transform.invert(z)


def transform_from_dict(d):
    return {"copula": CopulaTransform, "vanilla": Standardizer}[d["kind"]].from_dict(d)
