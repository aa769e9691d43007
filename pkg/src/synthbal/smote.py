"""SMOTE oversampling by interpolation between minority nearest neighbours."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import cdist

from .data import Table, class_counts
from .errors import ClassTooSmall

logger = logging.getLogger(__name__)

MATCH_MAJORITY = "match majority"


@dataclass(frozen=True)
class SmoteConfig:
    """Parameters for :func:`smote_balance`.

    ``target_count`` is the minority row count to reach, or
    ``"match majority"``. ``scale="standard"`` measures neighbour distances
    on z-scored columns; interpolation always happens in the raw space.
    """

    k_neighbors: int = 5
    target_count: Union[int, str] = MATCH_MAJORITY
    seed: int = 0
    scale: str = "none"

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.scale not in ("none", "standard"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.target_count != MATCH_MAJORITY and int(self.target_count) < 0:
            raise ValueError("target_count must be non-negative")


def _scaled(x, scale):
    if scale == "standard":
        std = x.std(axis=0)
        return (x - x.mean(axis=0)) / np.where(std > 0, std, 1.0)
    return x


def knn_within_class(t: Table, label: int, k: int, scale: str = "none"):
    """Nearest same-class neighbours of every row of class ``label``.

    Returns ``(rows, neighbors)``: the table indices of the class rows and a
    ``(len(rows), k)`` array of neighbour table indices, nearest first. Ties
    go to the lower row index and a row is never its own neighbour.
    """
    rows = t.class_rows(label)
    if rows.size <= k:
        raise ClassTooSmall(
            f"class {label} has {rows.size} rows; need more than k={k}"
        )
    x = _scaled(t.features[rows], scale)
    d = cdist(x, x, metric="sqeuclidean")
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    return rows, rows[order]


def synthesize(base: np.ndarray, neighbor: np.ndarray, u) -> np.ndarray:
    """Points ``base + u * (neighbor - base)``; ``u`` broadcasts per row."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    return base + u * (neighbor - base)


def smote_balance(t: Table, cfg: SmoteConfig = SmoteConfig()) -> Table:
    """Oversample the minority class up to the configured target.

    Synthetic rows are appended after the untouched original rows. Each
    draws its base row, neighbour slot and interpolation weight
    independently from one seeded stream.
    """
    counts = class_counts(t)
    if counts[0] == counts[1]:
        logger.info("classes already balanced; returning input unchanged")
        return t
    minority = 0 if counts[0] < counts[1] else 1
    majority_n = max(counts.values())
    target = majority_n if cfg.target_count == MATCH_MAJORITY else int(cfg.target_count)
    n_new = target - counts[minority]
    if n_new <= 0:
        return t
    rows, nbrs = knn_within_class(t, minority, cfg.k_neighbors, cfg.scale)
    rng = np.random.default_rng(cfg.seed)
    base_pos = rng.integers(0, rows.size, size=n_new)
    slot = rng.integers(0, cfg.k_neighbors, size=n_new)
    u = rng.random(n_new)
    base = t.features[rows[base_pos]]
    other = t.features[nbrs[base_pos, slot]]
    synth = synthesize(base, other, u)
    return t.with_rows(synth, np.full(n_new, minority))
