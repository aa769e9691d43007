"""Named learner configurations shipped as data (``presets.json``)."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from typing import Union

from ..data import Table
from .extra_trees import EtcConfig, fit_extra_trees
from .gbdt import GbdtConfig, fit_gbdt
from .model import TrainedModel

PRESET_ORDER = ("xgb-paper", "lgbm-paper", "etc-paper", "catboost-paper", "gbc-paper")


@dataclass(frozen=True)
class Preset:
    name: str
    label: str
    kind: str
    config: Union[GbdtConfig, EtcConfig]
    reported: dict

    def fit(self, t: Table) -> TrainedModel:
        if self.kind == "extra_trees":
            return fit_extra_trees(t, self.config)
        return fit_gbdt(t, self.config)

    def with_overrides(self, **overrides) -> "Preset":
        return replace(self, config=replace(self.config, **overrides))


@lru_cache(maxsize=1)
def _raw_presets() -> dict:
    text = resources.files("synthbal.learners").joinpath("presets.json").read_text()
    return {k: v for k, v in json.loads(text).items() if not k.startswith("_")}


def preset_names() -> list:
    return list(_raw_presets())


def make_config(kind: str, params: dict):
    if kind == "extra_trees":
        return EtcConfig(**params)
    if kind == "gbdt":
        return GbdtConfig(**params)
    raise ValueError(f"unknown learner kind {kind!r}")


def get_preset(name: str, overrides: dict = None) -> Preset:
    raw = _raw_presets()
    if name not in raw:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(raw)}")
    entry = raw[name]
    params = dict(entry["config"])
    params.update(overrides or {})
    return Preset(
        name=name,
        label=entry["label"],
        kind=entry["kind"],
        config=make_config(entry["kind"], params),
        reported=dict(entry["reported"]),
    )
