"""Gradient boosting on logistic loss, first- or second-order."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from ..data import Table
from ..errors import SingleClassInput
from .model import TrainedModel
from .tree import Tree, TreeParams, grow_boosting_tree, restrict_sorted

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GbdtConfig:
    order: str = "second"  # "second": Newton boosting; "first": residual fitting
    learning_rate: float = 0.1
    n_estimators: int = 100
    max_depth: Optional[int] = 6
    num_leaves: Optional[int] = None
    growth: str = "depthwise"
    min_child_weight: float = 1.0
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    subsample: float = 1.0
    colsample: float = 1.0
    l1_alpha: float = 0.0
    l2_lambda: float = 1.0
    early_stopping_rounds: Optional[int] = None
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.order not in ("first", "second"):
            raise ValueError("order must be 'first' or 'second'")
        if self.growth not in ("depthwise", "leafwise"):
            raise ValueError("growth must be 'depthwise' or 'leafwise'")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not (0 < self.subsample <= 1 and 0 < self.colsample <= 1):
            raise ValueError("subsample and colsample must lie in (0, 1]")
        if self.l1_alpha < 0 or self.l2_lambda < 0:
            raise ValueError("regularisation strengths must be non-negative")
        if self.early_stopping_rounds is not None and self.early_stopping_rounds < 1:
            raise ValueError("early_stopping_rounds must be >= 1")

    def tree_params(self) -> TreeParams:
        return TreeParams(
            max_depth=self.max_depth,
            num_leaves=self.num_leaves,
            growth=self.growth,
            min_child_weight=self.min_child_weight,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            l1_alpha=self.l1_alpha,
            l2_lambda=self.l2_lambda,
            allow_zero_gain=self.order == "first",
        )

    def to_dict(self):
        return asdict(self)


def logloss(y, p) -> float:
    p = np.clip(p, 1e-15, 1 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


def fit_boosting_tree(gradients, hessians, features, cfg: GbdtConfig, rng=None,
                      g_leaf=None, h_leaf=None) -> Tree:
    """Fit one tree to gradient statistics over all rows of ``features``.

    Column subsampling draws from ``rng`` (default: ``cfg.seed``).
    """
    x = np.asarray(features, dtype=float)
    g = np.asarray(gradients, dtype=float)
    h = np.asarray(hessians, dtype=float)
    if g.shape != h.shape or g.shape[0] != x.shape[0]:
        raise ValueError("gradients, hessians and features must have the same rows")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    cols = _column_sample(x.shape[1], cfg.colsample, rng)
    return grow_boosting_tree(
        x, g, h, np.arange(x.shape[0]), cols, cfg.tree_params(), g_leaf, h_leaf
    )


def _column_sample(d, frac, rng):
    if frac >= 1.0:
        return np.arange(d)
    k = max(1, int(round(frac * d)))
    return np.sort(rng.choice(d, size=k, replace=False))


def _row_sample(n, frac, rng):
    if frac >= 1.0:
        return np.arange(n)
    k = max(2, int(round(frac * n)))
    return np.sort(rng.choice(n, size=min(k, n), replace=False))


def _holdout(y, fraction, seed):
    """Stratified (train_idx, valid_idx) with half-up rounding per class."""
    train, valid = [], []
    for label in (0, 1):
        rows = np.flatnonzero(y == label)
        rng = np.random.default_rng([seed, 7919, label])
        rows = rng.permutation(rows)
        n_val = int(math.floor(rows.size * fraction + 0.5))
        n_val = min(max(n_val, 1), rows.size - 1)
        valid.append(rows[:n_val])
        train.append(rows[n_val:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(valid))


def fit_gbdt(t: Table, cfg: GbdtConfig = GbdtConfig()) -> TrainedModel:
    """Boost trees on the logistic loss of ``t``'s labels.

    Second order grows trees on ``g = p - y`` and ``h = p(1 - p)``. First
    order grows trees on the residual ``y - p`` under squared error and then
    sets each leaf to the Newton step ``sum(y - p) / sum(p(1 - p))``; like a
    plain regression tree it also takes zero-gain splits while residuals
    within a node differ, so symmetric patterns such as XOR can be split. With
    ``early_stopping_rounds`` a stratified slice of ``validation_fraction``
    is held out and prediction later uses the first ``best_iteration`` trees.
    """
    y_all = t.labels.astype(float)
    if np.unique(t.labels).size < 2:
        raise SingleClassInput("boosting needs both classes present")
    x_all = t.features
    if cfg.early_stopping_rounds:
        tr, va = _holdout(t.labels, cfg.validation_fraction, cfg.seed)
        x, y = x_all[tr], y_all[tr]
        x_val, y_val = x_all[va], y_all[va]
    else:
        x, y = x_all, y_all
        x_val = y_val = None
    n, d = x.shape
    prior = float(np.clip(y.mean(), 1e-6, 1 - 1e-6))
    base = math.log(prior / (1 - prior))
    params = cfg.tree_params()
    presorted = np.ascontiguousarray(np.argsort(x, axis=0, kind="stable").T)
    margin = np.full(n, base)
    val_margin = None if x_val is None else np.full(x_val.shape[0], base)
    trees, train_loss, val_loss = [], [], []
    best_iter, best_val, since_best = None, math.inf, 0
    for rnd in range(cfg.n_estimators):
        rng = np.random.default_rng([cfg.seed, rnd])
        rows = _row_sample(n, cfg.subsample, rng)
        cols = _column_sample(d, cfg.colsample, rng)
        sorted_rows = restrict_sorted(np.ascontiguousarray(presorted[cols]), rows, n)
        p = expit(margin)
        hess = p * (1.0 - p)
        if cfg.order == "second":
            tree = grow_boosting_tree(x, p - y, hess, rows, cols, params,
                                      sorted_rows=sorted_rows)
        else:
            tree = grow_boosting_tree(x, p - y, np.ones(n), rows, cols, params,
                                      g_leaf=p - y, h_leaf=hess, sorted_rows=sorted_rows)
        trees.append(tree)
        margin += cfg.learning_rate * tree.predict(x)
        train_loss.append(logloss(y, expit(margin)))
        if val_margin is not None:
            val_margin += cfg.learning_rate * tree.predict(x_val)
            loss = logloss(y_val, expit(val_margin))
            val_loss.append(loss)
            if loss < best_val:
                best_val, best_iter, since_best = loss, rnd + 1, 0
            else:
                since_best += 1
                if since_best >= cfg.early_stopping_rounds:
                    logger.debug("early stop at round %d (best %d)", rnd + 1, best_iter)
                    break
    return TrainedModel(
        kind="gbdt",
        trees=trees,
        n_features=d,
        config=cfg.to_dict(),
        base_score=base,
        learning_rate=cfg.learning_rate,
        best_iteration=best_iter if cfg.early_stopping_rounds else len(trees),
        history={"train_logloss": train_loss, "valid_logloss": val_loss},
    )
