"""Extremely randomised trees classifier."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from ..data import Table
from ..errors import SingleClassInput
from .model import TrainedModel
from .tree import grow_random_tree


@dataclass(frozen=True)
class EtcConfig:
    n_estimators: int = 950
    min_samples_split: int = 2
    max_features: Union[float, str] = "sqrt"
    max_depth: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if isinstance(self.max_features, str):
            if self.max_features not in ("sqrt", "all"):
                raise ValueError("max_features must be a fraction, 'sqrt' or 'all'")
        elif not 0 < self.max_features <= 1:
            raise ValueError("fractional max_features must lie in (0, 1]")

    def features_per_node(self, d: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(d)))
        if self.max_features == "all":
            return d
        return max(1, int(round(self.max_features * d)))

    def to_dict(self):
        return asdict(self)


def tree_seed(seed: int, index: int) -> int:
    """Independent 32-bit seed for tree ``index`` of a forest."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def fit_extra_trees(t: Table, cfg: EtcConfig = EtcConfig()) -> TrainedModel:
    """Grow ``n_estimators`` randomised trees on the full sample (no bootstrap).

    Tree ``i`` draws from its own stream seeded by ``(cfg.seed, i)``.
    """
    if np.unique(t.labels).size < 2:
        raise SingleClassInput("extra trees need both classes present")
    x, y = t.features, t.labels
    rows = np.arange(t.row_count)
    k = cfg.features_per_node(t.col_count)
    trees = [
        grow_random_tree(x, y, rows, k, cfg.min_samples_split, tree_seed(cfg.seed, i), cfg.max_depth)
        for i in range(cfg.n_estimators)
    ]
    return TrainedModel(
        kind="extra_trees", trees=trees, n_features=t.col_count, config=cfg.to_dict()
    )
