"""Quadratic benchmark shared by the search tests."""
import numpy as np

from synthbal.hyperopt import ParamSpec, Study, best_trial, run_study

X = ParamSpec("x", "float_uniform", -10.0, 10.0)


def objective(trial):
    x = trial.suggest(X)
    return -((x - 2.0) ** 2)


def tpe_best(seed, n_trials=100):
    study = run_study(objective, n_trials, Study("maximize", seed=seed))
    return best_trial(study)


def random_best(seed, n_trials=100):
    rng = np.random.default_rng(10_000 + seed)
    xs = rng.uniform(-10.0, 10.0, n_trials)
    return float(np.max(-((xs - 2.0) ** 2)))
