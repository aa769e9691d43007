"""Objectives that connect the search engine to the GAN and the learners."""
from __future__ import annotations

import json
import logging
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .data import Table, stratified_kfold
from .errors import SpecConflict, TrialPruned
from .hyperopt import ParamSpec, PruneDecision, Study, load_space
from .learners.presets import get_preset
from .metrics import cross_validate
from .tabgan import GanConfig, fidelity_report, sample_synthetic, train_gan

logger = logging.getLogger(__name__)


def default_space(target: str) -> list:
    """Shipped search space for ``"gan"`` or a preset's learner kind."""
    if target == "gan":
        fname = "gan.json"
    else:
        fname = f"{get_preset(target).kind}.json"
    text = resources.files("synthbal.spaces").joinpath(fname).read_text()
    return load_space(json.loads(text))


def read_space(path) -> list:
    return load_space(json.loads(Path(path).read_text()))


def _minority(t: Table) -> Table:
    counts = np.bincount(t.labels, minlength=2)
    return t.take(t.class_rows(int(np.argmin(counts))))


def gan_objective(t: Table, space: list, base: GanConfig, fidelity_sample: int = 500,
                  seed: int = 0):
    """Objective maximising negative fidelity gap of a GAN trained on the minority class.

    The gap is scored after every epoch on a fixed-size draw so the pruner
    can compare trials epoch by epoch.
    """
    real = _minority(t)
    real_std = real.features.std(axis=0)
    n_draw = min(fidelity_sample, max(real.row_count, 2))

    def score(model, draw_seed):
        fake = sample_synthetic(model, n_draw, seed=draw_seed)
        return -fidelity_report(real, fake).summary_gap(real_std)

    def objective(trial):
        params = {spec.name: trial.suggest(spec) for spec in space}
        cfg = replace(base, **params, seed=seed + trial.number)

        def on_epoch(epoch, model):
            if trial.report(score(model, seed), epoch) is PruneDecision.PRUNE:
                raise TrialPruned()

        model = train_gan(real, cfg, on_epoch=on_epoch)
        return score(model, seed)

    return objective


def model_objective(t: Table, preset_name: str, space: list, folds: int, seed: int = 0,
                    overrides: dict = None):
    """Objective maximising mean cross-validated weighted F1 of one preset."""
    assignment = stratified_kfold(t, folds, seed)

    def objective(trial):
        params = {spec.name: trial.suggest(spec) for spec in space}
        preset = get_preset(preset_name, {**(overrides or {}), **params})
        running = []

        def on_fold(k, reports):
            running.append(reports["model"].weighted_f1)
            if trial.report(float(np.mean(running)), k) is PruneDecision.PRUNE:
                raise TrialPruned()

        result = cross_validate(t, assignment, lambda tr, _k: preset.fit(tr),
                                seed=seed, on_fold=on_fold)
        return result.mean["model"].weighted_f1

    return objective


def check_space(space: list) -> list:
    if not space:
        raise SpecConflict("search space is empty")
    if not all(isinstance(s, ParamSpec) for s in space):
        raise TypeError("space entries must be ParamSpec")
    return space


def new_study(target: str, seed: int) -> Study:
    return Study("maximize", seed=seed, name=f"tune-{target}")
