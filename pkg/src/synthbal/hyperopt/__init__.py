"""Define-by-run hyperparameter search: TPE sampling plus median pruning."""
from .space import KINDS, ParamSpec, load_space
from .study import (
    PruneDecision,
    PrunerConfig,
    Study,
    Trial,
    TrialHandle,
    TrialState,
    best_trial,
    median_prune_decision,
    report_and_check_prune,
    run_study,
)
from .tpe import SamplerConfig, split_observations, tpe_propose
from ..errors import TrialPruned

__all__ = [
    "KINDS",
    "ParamSpec",
    "PruneDecision",
    "PrunerConfig",
    "SamplerConfig",
    "Study",
    "Trial",
    "TrialHandle",
    "TrialPruned",
    "TrialState",
    "best_trial",
    "load_space",
    "median_prune_decision",
    "report_and_check_prune",
    "run_study",
    "split_observations",
    "tpe_propose",
]
