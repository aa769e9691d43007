"""Trained tree ensembles: prediction, importance and JSON round-trip."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit

from ..errors import ShapeMismatch
from .tree import LEAF, Tree


@dataclass
class TrainedModel:
    """A fitted boosted model (``kind="gbdt"``) or forest (``kind="extra_trees"``)."""

    kind: str
    trees: list
    n_features: int
    config: dict
    base_score: float = 0.0
    learning_rate: float = 1.0
    best_iteration: Optional[int] = None
    history: dict = field(default_factory=dict)

    @property
    def n_used_trees(self) -> int:
        if self.kind == "gbdt" and self.best_iteration is not None:
            return self.best_iteration
        return len(self.trees)

    def _check(self, rows):
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.n_features:
            raise ShapeMismatch(
                f"model expects {self.n_features} features, got shape {rows.shape}"
            )
        return rows

    def decision_function(self, rows) -> np.ndarray:
        """Boosting margin ``base + lr * sum(tree outputs)``."""
        rows = self._check(rows)
        margin = np.full(rows.shape[0], self.base_score)
        for tree in self.trees[: self.n_used_trees]:
            margin += self.learning_rate * tree.predict(rows)
        return margin

    def predict_proba(self, rows) -> np.ndarray:
        """``(n, 2)`` array of class probabilities; rows sum to 1."""
        if self.kind == "gbdt":
            p1 = expit(self.decision_function(rows))
            return np.column_stack([1.0 - p1, p1])
        rows = self._check(rows)
        acc = np.zeros((rows.shape[0], 2))
        for tree in self.trees:
            acc += tree.predict(rows)
        acc /= max(len(self.trees), 1)
        p1 = np.clip(acc[:, 1], 0.0, 1.0)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, rows) -> np.ndarray:
        return (self.predict_proba(rows)[:, 1] >= 0.5).astype(np.int64)

    def to_dict(self):
        return {
            "format": "synthbal.model/1",
            "kind": self.kind,
            "n_features": self.n_features,
            "config": self.config,
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "best_iteration": self.best_iteration,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            trees=[Tree.from_dict(t) for t in d["trees"]],
            n_features=d["n_features"],
            config=d["config"],
            base_score=d["base_score"],
            learning_rate=d["learning_rate"],
            best_iteration=d["best_iteration"],
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def predict_proba(m: TrainedModel, rows) -> np.ndarray:
    return m.predict_proba(rows)


def feature_importance(m: TrainedModel) -> np.ndarray:
    """Total split gain per feature, normalised to sum to 1.

    A model without any split yields an all-zero vector.
    """
    scores = np.zeros(m.n_features)
    for tree in m.trees[: m.n_used_trees]:
        internal = tree.feature != LEAF
        np.add.at(scores, tree.feature[internal], tree.gain[internal])
    total = scores.sum()
    return scores / total if total > 0 else scores
