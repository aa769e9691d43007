"""Binary classification metrics and the leakage-safe cross-validation harness."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .data import FoldAssignment, Table, class_counts, concat
from .errors import EmptyInput, FoldError, LengthMismatch
from .smote import smote_balance
from .tabgan import sample_synthetic, train_gan

logger = logging.getLogger(__name__)

METRIC_FIELDS = ("accuracy", "precision", "recall", "f1", "weighted_f1", "rmse")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "ConfusionMatrix":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        return cls(
            int(np.sum(t & p)), int(np.sum(~t & p)), int(np.sum(~t & ~p)), int(np.sum(t & ~p))
        )


def _ratio(num, den, flag, flags):
    if den == 0:
        flags.add(flag)
        return 0.0
    return num / den


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    weighted_f1: float
    rmse: float
    undefined: frozenset = field(default_factory=frozenset)
    n: int = 0

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in METRIC_FIELDS}
        d["undefined"] = sorted(self.undefined)
        d["n"] = self.n
        return d

    @classmethod
    def from_dict(cls, d) -> "MetricsReport":
        return cls(
            *(float(d[k]) for k in METRIC_FIELDS),
            undefined=frozenset(d.get("undefined", ())),
            n=int(d.get("n", 0)),
        )


def binary_metrics(y_true, y_pred) -> MetricsReport:
    """Accuracy, precision, recall, F1, support-weighted F1 and RMSE.

    The positive class is 1. A ratio with a zero denominator is reported as
    0 and its name is listed in ``undefined``.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{y_true.size} labels vs {y_pred.size} predictions")
    if y_true.size == 0:
        raise EmptyInput("no rows to score")
    cm = ConfusionMatrix.from_labels(y_true, y_pred)
    flags: set = set()
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", flags)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall", flags)
    if precision + recall == 0:
        flags.add("f1")
    f1 = _f1(precision, recall)
    # class-0 view: negatives become positives
    p0 = _ratio(cm.tn, cm.tn + cm.fn, "precision_0", flags)
    r0 = _ratio(cm.tn, cm.tn + cm.fp, "recall_0", flags)
    f1_0 = _f1(p0, r0)
    support1, support0 = cm.tp + cm.fn, cm.tn + cm.fp
    weighted_f1 = (support1 * f1 + support0 * f1_0) / cm.n
    errors = cm.fp + cm.fn
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.n,
        precision=precision,
        recall=recall,
        f1=f1,
        weighted_f1=weighted_f1,
        rmse=math.sqrt(errors / cm.n),
        undefined=frozenset(flags),
        n=cm.n,
    )


def mean_report(reports) -> MetricsReport:
    """Unweighted mean over folds; ``undefined`` is the union of flags.

    RMSE is aggregated as the root of the mean squared error so that
    ``rmse == sqrt(1 - accuracy)`` still holds for the averaged report.
    """
    reports = list(reports)
    if not reports:
        raise EmptyInput("no reports to average")
    vals = {k: float(np.mean([getattr(r, k) for r in reports])) for k in METRIC_FIELDS}
    vals["rmse"] = math.sqrt(float(np.mean([r.rmse ** 2 for r in reports])))
    flags = frozenset().union(*(r.undefined for r in reports))
    return MetricsReport(**vals, undefined=flags, n=sum(r.n for r in reports))


# -- sampling policies -----------------------------------------------------

@dataclass(frozen=True)
class SamplingPolicy:
    """How training rows are augmented before fitting.

    ``kind`` is ``"none"``, ``"smote"`` (``config`` a SmoteConfig) or
    ``"gan"`` (``config`` a GanConfig).
    """

    kind: str = "none"
    config: object = None

    def apply(self, train: Table, seed: int = 0) -> Table:
        if self.kind == "none":
            return train
        if self.kind == "smote":
            return smote_balance(train, replace(self.config, seed=self.config.seed + seed))
        if self.kind == "gan":
            counts = class_counts(train)
            minority = 0 if counts[0] < counts[1] else 1
            n_new = abs(counts[0] - counts[1])
            if n_new == 0:
                return train
            cfg = replace(self.config, seed=self.config.seed + seed)
            model = train_gan(train.take(train.class_rows(minority)), cfg)
            return concat(train, sample_synthetic(model, n_new, seed=cfg.seed + 1))
        raise ValueError(f"unknown sampling policy {self.kind!r}")


# -- cross-validation ------------------------------------------------------

@dataclass
class CVResult:
    """Per-model fold reports (in fold order) and their means."""

    folds: dict  # name -> list[MetricsReport]
    mean: dict  # name -> MetricsReport
    extras: list = field(default_factory=list)  # per-fold info from the fitter

    def to_dict(self):
        return {
            "folds": {k: [r.to_dict() for r in v] for k, v in self.folds.items()},
            "mean": {k: r.to_dict() for k, r in self.mean.items()},
        }


SINGLE = "model"


def cross_validate(
    t: Table,
    folds: FoldAssignment,
    fit: Callable,
    policy: SamplingPolicy = SamplingPolicy(),
    seed: int = 0,
    on_fold: Optional[Callable[[int, dict], None]] = None,
) -> CVResult:
    """K-fold evaluation with augmentation confined to the training side.

    ``fit(train_table, fold_index)`` returns either a model with
    ``predict(rows)`` or a callable mapping rows to ``{name: labels}`` (used
    to score several members and their ensemble from one fit). Validation
    rows are always the untouched real rows of the fold.
    ``on_fold(k, reports)`` runs after each fold (tuning uses it to prune).
    """
    if folds.fold_of_row.shape[0] != t.row_count:
        raise ValueError("fold assignment does not cover the table")
    per_model: dict = {}
    extras = []
    for k in range(folds.k):
        train = t.take(folds.training_rows(k))
        valid = t.take(folds.validation_rows(k))
        try:
            augmented = policy.apply(train, seed=seed + k)
            fitted = fit(augmented, k)
            preds = fitted(valid.features) if callable(fitted) else fitted.predict(valid.features)
        except Exception as exc:
            raise FoldError(k, exc) from exc
        if not isinstance(preds, dict):
            preds = {SINGLE: preds}
        reports = {}
        for name, labels in preds.items():
            rep = binary_metrics(valid.labels, labels)
            per_model.setdefault(name, []).append(rep)
            reports[name] = rep
        extras.append(getattr(fitted, "info", None))
        if on_fold is not None:
            on_fold(k, reports)
    return CVResult(per_model, {k: mean_report(v) for k, v in per_model.items()}, extras)
