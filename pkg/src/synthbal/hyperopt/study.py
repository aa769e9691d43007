"""Study/trial bookkeeping, median pruning and the optimisation loop."""
from __future__ import annotations

import json
import logging
import math
import threading
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..errors import NoCompleteTrials, OutOfOrderStep, SpecConflict, TrialPruned
from .space import ParamSpec
from .tpe import SamplerConfig, split_observations, tpe_propose

logger = logging.getLogger(__name__)


class TrialState(str, Enum):
    RUNNING = "running"
    COMPLETE = "complete"
    PRUNED = "pruned"
    FAILED = "failed"


class PruneDecision(str, Enum):
    CONTINUE = "continue"
    PRUNE = "prune"


@dataclass(frozen=True)
class PrunerConfig:
    n_warmup_steps: int = 5
    n_min_trials: int = 4


@dataclass
class Trial:
    id: int
    params: dict = field(default_factory=dict)
    intermediate: list = field(default_factory=list)  # (step, value)
    state: TrialState = TrialState.RUNNING
    final_value: Optional[float] = None
    fail_reason: Optional[str] = None
    specs: dict = field(default_factory=dict, repr=False)

    def value_at(self, step):
        for s, v in self.intermediate:
            if s == step:
                return v
        return None

    def to_dict(self):
        return {
            "id": self.id,
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()},
            "intermediate": [[s, v] for s, v in self.intermediate],
            "state": self.state.value,
            "final_value": self.final_value,
            "fail_reason": self.fail_reason,
            "specs": {k: s.to_dict() for k, s in self.specs.items()},
        }

    @classmethod
    def from_dict(cls, d):
        specs = {k: ParamSpec.from_dict(s) for k, s in d.get("specs", {}).items()}
        params = {
            k: tuple(v) if isinstance(v, list) else v for k, v in d["params"].items()
        }
        return cls(
            id=d["id"],
            params=params,
            intermediate=[(s, v) for s, v in d["intermediate"]],
            state=TrialState(d["state"]),
            final_value=d["final_value"],
            fail_reason=d.get("fail_reason"),
            specs=specs,
        )


class Study:
    """Append-only record of trials plus sampler and pruner settings."""

    def __init__(
        self,
        direction: str = "maximize",
        sampler: SamplerConfig = SamplerConfig(),
        pruner: PrunerConfig = PrunerConfig(),
        seed: int = 0,
        name: str = "study",
    ):
        if direction not in ("maximize", "minimize"):
            raise ValueError("direction must be 'maximize' or 'minimize'")
        self.direction = direction
        self.sampler = sampler
        self.pruner = pruner
        self.seed = seed
        self.name = name
        self.trials: list[Trial] = []
        self._lock = threading.RLock()

    @property
    def maximize(self) -> bool:
        return self.direction == "maximize"

    def better(self, a: float, b: float) -> bool:
        """True when ``a`` is strictly better than ``b``."""
        return a > b if self.maximize else a < b

    def new_trial(self) -> Trial:
        with self._lock:
            trial = Trial(id=len(self.trials))
            self.trials.append(trial)
            return trial

    def _rng(self, trial_id: int, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, trial_id, zlib.crc32(name.encode())])

    def observations(self, name: str, spec: ParamSpec, exclude: int):
        """Return ``(complete_obs, pruned_values)`` for parameter ``name``."""
        complete, pruned = [], []
        for t in self.trials:
            if t.id == exclude or name not in t.params or not spec.contains(t.params[name]):
                continue
            if t.state is TrialState.COMPLETE:
                complete.append((t.params[name], t.final_value, t.id))
            elif t.state is TrialState.PRUNED and t.intermediate:
                pruned.append(t.params[name])
        return complete, pruned

    def sample(self, trial: Trial, spec: ParamSpec):
        with self._lock:
            rng = self._rng(trial.id, spec.name)
            complete, pruned = self.observations(spec.name, spec, trial.id)
            if len(complete) + len(pruned) < self.sampler.n_startup:
                return spec.sample_uniform(rng)
            good, bad = split_observations(
                complete, pruned, self.sampler.gamma_fraction, self.maximize
            )
            return tpe_propose(spec, good, bad, self.sampler.n_ei_candidates, rng)

    def to_dict(self):
        return {
            "format": "synthbal.study/1",
            "name": self.name,
            "direction": self.direction,
            "seed": self.seed,
            "sampler": {
                "n_startup": self.sampler.n_startup,
                "gamma_fraction": self.sampler.gamma_fraction,
                "n_ei_candidates": self.sampler.n_ei_candidates,
            },
            "pruner": {
                "n_warmup_steps": self.pruner.n_warmup_steps,
                "n_min_trials": self.pruner.n_min_trials,
            },
            "trials": [t.to_dict() for t in self.trials],
        }

    @classmethod
    def from_dict(cls, d):
        study = cls(
            d["direction"],
            SamplerConfig(**d["sampler"]),
            PrunerConfig(**d["pruner"]),
            d["seed"],
            d.get("name", "study"),
        )
        study.trials = [Trial.from_dict(t) for t in d["trials"]]
        return study

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


class TrialHandle:
    """What an objective function receives: suggest, report, prune check."""

    def __init__(self, study: Study, trial: Trial):
        self.study = study
        self.trial = trial
        self._last_decision = PruneDecision.CONTINUE

    @property
    def number(self) -> int:
        return self.trial.id

    @property
    def params(self) -> dict:
        return self.trial.params

    def suggest(self, spec: ParamSpec):
        known = self.trial.specs.get(spec.name)
        if known is not None:
            if known != spec:
                raise SpecConflict(
                    f"parameter {spec.name!r} re-declared with a different spec"
                )
            return self.trial.params[spec.name]
        value = self.study.sample(self.trial, spec)
        self.trial.specs[spec.name] = spec
        self.trial.params[spec.name] = value
        return value

    def suggest_float(self, name, low, high, log=False):
        kind = "float_log_uniform" if log else "float_uniform"
        return self.suggest(ParamSpec(name, kind, low, high))

    def suggest_int(self, name, low, high):
        return self.suggest(ParamSpec(name, "int_uniform", low, high))

    def suggest_categorical(self, name, choices):
        return self.suggest(ParamSpec(name, "categorical", choices=tuple(choices)))

    def report(self, value: float, step: int) -> PruneDecision:
        self._last_decision = report_and_check_prune(self, step, value)
        return self._last_decision

    def should_prune(self) -> bool:
        return self._last_decision is PruneDecision.PRUNE


def median_prune_decision(study: Study, trial_id: int, step: int, value: float) -> PruneDecision:
    """Median stopping rule evaluated against completed trials at ``step``."""
    cfg = study.pruner
    if step < cfg.n_warmup_steps:
        return PruneDecision.CONTINUE
    peers = []
    for t in study.trials:
        if t.id == trial_id or t.state is not TrialState.COMPLETE:
            continue
        v = t.value_at(step)
        if v is not None:
            peers.append(v)
    if len(peers) < max(cfg.n_min_trials, 1):
        return PruneDecision.CONTINUE
    median = float(np.median(peers))
    worse = value < median if study.maximize else value > median
    return PruneDecision.PRUNE if worse else PruneDecision.CONTINUE


def report_and_check_prune(handle: TrialHandle, step: int, value: float) -> PruneDecision:
    trial = handle.trial
    if trial.state is not TrialState.RUNNING:
        raise RuntimeError(f"trial {trial.id} is not running")
    if trial.intermediate and step <= trial.intermediate[-1][0]:
        raise OutOfOrderStep(
            f"step {step} reported after step {trial.intermediate[-1][0]}"
        )
    trial.intermediate.append((int(step), float(value)))
    with handle.study._lock:
        return median_prune_decision(handle.study, trial.id, step, value)


def _run_one(study: Study, objective: Callable) -> Trial:
    trial = study.new_trial()
    handle = TrialHandle(study, trial)
    try:
        value = objective(handle)
    except TrialPruned:
        if trial.intermediate:
            trial.state = TrialState.PRUNED
        else:
            trial.state = TrialState.FAILED
            trial.fail_reason = "pruned before any intermediate report"
        return trial
    except Exception as exc:  # objective failures are recorded, never raised
        trial.state = TrialState.FAILED
        trial.fail_reason = f"{type(exc).__name__}: {exc}"
        logger.warning("trial %d failed: %s", trial.id, trial.fail_reason)
        return trial
    try:
        value = float(value)
    except (TypeError, ValueError):
        value = math.nan
    if not math.isfinite(value):
        trial.state = TrialState.FAILED
        trial.fail_reason = f"objective returned non-finite value {value!r}"
    else:
        trial.final_value = value
        trial.state = TrialState.COMPLETE
    return trial


def run_study(objective: Callable, n_trials: int, study: Study, n_jobs: int = 1) -> Study:
    """Evaluate ``objective`` on ``n_trials`` new trials.

    Sequential execution (``n_jobs=1``) is reproducible for a fixed seed.
    """
    if n_trials < 0:
        raise ValueError("n_trials must be non-negative")
    if n_jobs <= 1:
        for _ in range(n_trials):
            _run_one(study, objective)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(lambda _: _run_one(study, objective), range(n_trials)))
    return study


def best_trial(study: Study) -> Trial:
    best = None
    for t in study.trials:
        if t.state is not TrialState.COMPLETE:
            continue
        if best is None or study.better(t.final_value, best.final_value):
            best = t
    if best is None:
        raise NoCompleteTrials("study has no complete trials")
    return best
