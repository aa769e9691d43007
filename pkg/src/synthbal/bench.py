"""Three-way benchmark: every preset plus the weighted ensemble on raw, SMOTE and GAN data."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Table, class_counts, stratified_kfold, stratified_split
from .ensemble import EnsembleModel, combine_hard, combine_soft, derive_weights
from .errors import AllZeroScores, FoldError
from .learners.presets import get_preset
from .metrics import METRIC_FIELDS, MetricsReport, SamplingPolicy, binary_metrics, cross_validate

logger = logging.getLogger(__name__)

DATASETS = (
    ("none", "Imbalanced"),
    ("smote", "Balanced (SMOTE)"),
    ("gan", "Balanced (GAN)"),
)
ENSEMBLE_LABEL = "Weighted Ensembled"
TABLE_METRICS = (
    ("accuracy", "Accuracy"),
    ("precision", "Precision"),
    ("recall", "Recall"),
    ("weighted_f1", "F1 score (weighted)"),
)


@dataclass
class BenchCell:
    model: str
    dataset: str
    metrics: Optional[MetricsReport] = None
    fold_metrics: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.metrics is not None

    def to_dict(self):
        return {
            "model": self.model,
            "dataset": self.dataset,
            "status": "ok" if self.ok else "failed",
            "metrics": self.metrics.to_dict() if self.ok else None,
            "fold_metrics": [r.to_dict() for r in self.fold_metrics] if self.ok else [],
            "error": self.error,
        }


@dataclass
class BenchReport:
    protocol: str
    seed: int
    folds: int
    ensemble_mode: str
    models: list
    datasets: list
    cells: list
    weights: dict  # dataset label -> per-fold weight lists
    dataset_info: dict

    @property
    def failed(self) -> list:
        return [c for c in self.cells if not c.ok]

    def cell(self, model: str, dataset: str) -> BenchCell:
        for c in self.cells:
            if c.model == model and c.dataset == dataset:
                return c
        raise KeyError((model, dataset))

    def to_dict(self):
        return {
            "format": "synthbal.bench/1",
            "protocol": self.protocol,
            "seed": self.seed,
            "folds": self.folds,
            "ensemble_mode": self.ensemble_mode,
            "models": list(self.models),
            "datasets": list(self.datasets),
            "dataset": self.dataset_info,
            "ensemble_weights": self.weights,
            "cells": [c.to_dict() for c in self.cells],
        }


# -- one dataset column ----------------------------------------------------

def _ensemble_fitter(presets, mode, holdout, seed, errors):
    """Build the per-fold fit function scoring all members and their ensemble.

    Weights are weighted-F1 scores of members fitted on an inner stratified
    split of the training fold; the members used for prediction are then
    refitted on the whole training fold. Member failures are logged into
    ``errors`` and the member is left out of that fold's ensemble.
    """
    weight_log = []

    def fit(train: Table, k: int):
        tr, va = stratified_split(train, holdout, seed + k)
        members, scores = {}, {}
        for p in presets:
            try:
                scores[p.label] = binary_metrics(va.labels, p.fit(tr).predict(va.features)).weighted_f1
                members[p.label] = p.fit(train)
            except Exception as exc:
                errors.setdefault(p.label, f"fold {k}: {type(exc).__name__}: {exc}")
                logger.warning("%s failed in fold %d: %s", p.label, k, exc)
        names = list(members)
        try:
            weights = derive_weights([scores[n] for n in names])
        except AllZeroScores as exc:
            errors.setdefault(ENSEMBLE_LABEL, f"fold {k}: AllZeroScores: {exc}")
            weights = None
        weight_log.append({n: float(scores[n]) for n in names})

        def predict(rows):
            out = {n: members[n].predict(rows) for n in names}
            if weights is not None:
                if mode == "soft":
                    probas = [members[n].predict_proba(rows) for n in names]
                    out[ENSEMBLE_LABEL] = combine_soft(probas, weights)[1]
                else:
                    out[ENSEMBLE_LABEL] = combine_hard([out[n] for n in names], weights)
            return out

        return predict

    return fit, weight_log


def fit_weighted_ensemble(train: Table, presets, mode: str = "soft", holdout: float = 0.2,
                          seed: int = 0) -> EnsembleModel:
    """Fit every preset on ``train`` and weight it by held-out weighted F1.

    Scores come from members fitted on a stratified split of ``train``; the
    returned members are refitted on all of ``train``.
    """
    tr, va = stratified_split(train, holdout, seed)
    scores = [binary_metrics(va.labels, p.fit(tr).predict(va.features)).weighted_f1
              for p in presets]
    weights = derive_weights(scores)
    members = [p.fit(train) for p in presets]
    return EnsembleModel(members, weights, mode, [p.name for p in presets])


def run_column(t: Table, kind: str, label: str, cfg, presets) -> tuple:
    """Evaluate all presets and the ensemble under one sampling policy."""
    model_labels = [p.label for p in presets] + [ENSEMBLE_LABEL]
    policy_cfg = {"none": None, "smote": cfg.smote, "gan": cfg.gan}[kind]
    policy = SamplingPolicy(kind, policy_cfg)
    errors: dict = {}
    fit, weight_log = _ensemble_fitter(presets, cfg.ensemble_mode, cfg.weight_holdout,
                                       cfg.seed, errors)
    try:
        if cfg.paper_mode:
            # balance first, then fold: synthetic rows can land in validation folds
            data = policy.apply(t, seed=cfg.seed)
            policy = SamplingPolicy()
        else:
            data = t
        folds = stratified_kfold(data, cfg.folds, cfg.seed)
        result = cross_validate(data, folds, fit, policy, seed=cfg.seed)
    except Exception as exc:
        cause = exc.cause if isinstance(exc, FoldError) else exc
        msg = f"{type(cause).__name__}: {cause}"
        if isinstance(exc, FoldError):
            msg = f"fold {exc.fold}: {msg}"
        logger.error("%s column failed: %s", label, msg)
        return [BenchCell(m, label, error=msg) for m in model_labels], weight_log
    cells = []
    for m in model_labels:
        reports = result.folds.get(m, [])
        if m in errors or len(reports) != cfg.folds:
            cells.append(BenchCell(m, label, error=errors.get(m, "missing fold results")))
        else:
            cells.append(BenchCell(m, label, result.mean[m], reports))
    return cells, weight_log


def run_bench(t: Table, cfg, dataset_info: Optional[dict] = None) -> BenchReport:
    """Run the 3 x (presets + ensemble) grid; cells fail independently.

    Columns run concurrently when ``cfg.jobs > 1``; every column seeds its
    own streams, so the output does not depend on ``jobs``.
    """
    presets = [get_preset(n, cfg.preset_overrides.get(n)) for n in cfg.presets]
    jobs = min(cfg.jobs, len(DATASETS))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(lambda d: run_column(t, d[0], d[1], cfg, presets), DATASETS))
    else:
        columns = [run_column(t, kind, label, cfg, presets) for kind, label in DATASETS]
    model_labels = [p.label for p in presets] + [ENSEMBLE_LABEL]
    by_key = {(c.model, c.dataset): c for cells, _ in columns for c in cells}
    ordered = [by_key[(m, d)] for m in model_labels for _, d in DATASETS]
    info = dict(dataset_info or {})
    info.setdefault("rows", t.row_count)
    info.setdefault("columns", t.col_count)
    info.setdefault("class_counts", {str(k): v for k, v in class_counts(t).items()})
    return BenchReport(
        protocol="paper-mode" if cfg.paper_mode else "leakage-safe",
        seed=cfg.seed,
        folds=cfg.folds,
        ensemble_mode=cfg.ensemble_mode,
        models=model_labels,
        datasets=[d for _, d in DATASETS],
        cells=ordered,
        weights={label: log for (_, label), (_, log) in zip(DATASETS, columns)},
        dataset_info=info,
    )


# -- rendering -------------------------------------------------------------

def _fmt(cell: BenchCell, metric: str) -> str:
    return f"{getattr(cell.metrics, metric):.6f}" if cell.ok else "FAILED"


def render_text(report: BenchReport) -> str:
    """Two plain-text tables: the four headline metrics, then RMSE."""
    out = io.StringIO()
    protocol = f"protocol: {report.protocol}, folds: {report.folds}, seed: {report.seed}"
    name_w = max(len(m) for m in report.models + ["Model"])
    col_w = max(len(d) for d in report.datasets)

    def table(title, metrics):
        out.write(title + "\n")
        groups = " | ".join(
            f"{label:^{len(report.datasets) * (col_w + 1) - 1}}" for _, label in metrics
        )
        out.write(f"{'':<{name_w}} | {groups}\n")
        sub = " | ".join(" ".join(f"{d:>{col_w}}" for d in report.datasets) for _ in metrics)
        out.write(f"{'Model':<{name_w}} | {sub}\n")
        out.write("-" * (name_w + 3 + len(sub)) + "\n")
        for m in report.models:
            vals = " | ".join(
                " ".join(f"{_fmt(report.cell(m, d), key):>{col_w}}" for d in report.datasets)
                for key, _ in metrics
            )
            out.write(f"{m:<{name_w}} | {vals}\n")
        out.write("\n")

    out.write(protocol + "\n\n")
    table("Classification metrics (fraction, cross-validated mean)", TABLE_METRICS)
    table("RMSE", (("rmse", "RMSE"),))
    failed = report.failed
    if failed:
        out.write("Failed cells:\n")
        for c in failed:
            out.write(f"  {c.model} / {c.dataset}: {c.error}\n")
    return out.getvalue()


def render_csv(report: BenchReport) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["model", "dataset", "status", *METRIC_FIELDS])
    for c in report.cells:
        vals = [f"{getattr(c.metrics, k):.6f}" if c.ok else "" for k in METRIC_FIELDS]
        w.writerow([c.model, c.dataset, "ok" if c.ok else "failed", *vals])
    return out.getvalue()


def write_report(report: BenchReport, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "bench.json": json.dumps(report.to_dict(), indent=2) + "\n",
        "bench.csv": render_csv(report),
        "bench.txt": render_text(report),
    }
    for name, text in paths.items():
        (out_dir / name).write_text(text)
    return {name: out_dir / name for name in paths}


def rmse_identity_gap(report: BenchReport) -> float:
    """Largest |rmse - sqrt(1 - accuracy)| over successful cells and their folds."""
    gaps = [
        abs(r.rmse - math.sqrt(max(0.0, 1.0 - r.accuracy)))
        for c in report.cells if c.ok for r in [c.metrics, *c.fold_metrics]
    ]
    return float(np.max(gaps)) if gaps else 0.0
