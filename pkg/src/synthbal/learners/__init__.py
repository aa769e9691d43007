"""Tree learners: regularised gradient boosting and extremely randomised trees."""
from .extra_trees import EtcConfig, fit_extra_trees
from .gbdt import GbdtConfig, fit_boosting_tree, fit_gbdt, logloss
from .model import TrainedModel, feature_importance, predict_proba
from .presets import PRESET_ORDER, Preset, get_preset, preset_names
from .tree import Tree, TreeParams, leaf_weight, split_gain

__all__ = [
    "EtcConfig",
    "GbdtConfig",
    "PRESET_ORDER",
    "Preset",
    "TrainedModel",
    "Tree",
    "TreeParams",
    "feature_importance",
    "fit_boosting_tree",
    "fit_extra_trees",
    "fit_gbdt",
    "get_preset",
    "leaf_weight",
    "logloss",
    "predict_proba",
    "preset_names",
    "split_gain",
]
