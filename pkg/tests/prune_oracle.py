"""Brute-force median pruning oracle and random study states."""
import numpy as np

from synthbal.hyperopt import PrunerConfig, Study, TrialState
from synthbal.hyperopt.study import Trial


def oracle(direction, warmup, min_trials, completed_histories, step, value):
    """Prune decision recomputed from first principles."""
    if step < warmup:
        return "continue"
    peers = sorted(dict(h)[step] for h in completed_histories if step in dict(h))
    if len(peers) < max(min_trials, 1):
        return "continue"
    m = len(peers)
    median = peers[m // 2] if m % 2 else 0.5 * (peers[m // 2 - 1] + peers[m // 2])
    worse = value < median if direction == "maximize" else value > median
    return "prune" if worse else "continue"


def random_state(rng):
    """A study with a mix of complete, pruned and failed trials plus a probe."""
    direction = str(rng.choice(["maximize", "minimize"]))
    warmup = int(rng.integers(0, 4))
    min_trials = int(rng.integers(0, 5))
    study = Study(direction, pruner=PrunerConfig(warmup, min_trials), seed=0)
    completed = []
    for i in range(int(rng.integers(0, 9))):
        n_steps = int(rng.integers(0, 7))
        steps = sorted(rng.choice(8, size=n_steps, replace=False).tolist())
        hist = [(int(s), float(np.round(rng.normal(), 1))) for s in steps]
        states = [TrialState.COMPLETE, TrialState.PRUNED, TrialState.FAILED]
        state = states[int(rng.choice(3, p=[0.7, 0.2, 0.1]))]
        study.trials.append(Trial(id=i, intermediate=hist, state=state,
                                  final_value=0.0 if state == TrialState.COMPLETE else None))
        if state == TrialState.COMPLETE:
            completed.append(hist)
    step = int(rng.integers(0, 8))
    value = float(np.round(rng.normal(), 1))
    return study, completed, step, value
