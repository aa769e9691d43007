"""Pipeline configuration: one JSON file plus command-line overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .data import DEFAULT_LABEL
from .errors import SynthbalError
from .learners.presets import PRESET_ORDER, preset_names
from .smote import SmoteConfig
from .tabgan import GanConfig

SAMPLING_KINDS = ("none", "smote", "gan")


class ConfigError(SynthbalError):
    pass


@dataclass
class TuneSettings:
    target: str = "gan"  # "gan" or a preset name
    n_trials: int = 20
    space: Optional[str] = None  # path to a JSON search-space file
    folds: int = 3
    fidelity_sample: int = 500  # rows drawn per epoch when scoring a GAN trial


@dataclass
class PipelineConfig:
    input: Optional[str] = None
    label_column: str = DEFAULT_LABEL
    correlation_threshold: Optional[float] = 0.95  # None skips pruning
    sampling: str = "smote"  # policy used by ``balance``
    gan: GanConfig = field(default_factory=GanConfig)
    smote: SmoteConfig = field(default_factory=SmoteConfig)
    folds: int = 10
    presets: tuple = PRESET_ORDER
    preset_overrides: dict = field(default_factory=dict)  # name -> config fields
    ensemble_mode: str = "soft"
    weight_holdout: float = 0.2
    seed: int = 0
    out_dir: str = "out"
    paper_mode: bool = False
    jobs: int = 1
    tune: TuneSettings = field(default_factory=TuneSettings)

    def validate(self, need_input: bool = True) -> "PipelineConfig":
        if need_input:
            if not self.input:
                raise ConfigError("no input file given (use --input or the config 'input' key)")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.sampling not in SAMPLING_KINDS:
            raise ConfigError(f"sampling must be one of {SAMPLING_KINDS}")
        if self.ensemble_mode not in ("soft", "hard"):
            raise ConfigError("ensemble_mode must be 'soft' or 'hard'")
        if not 0 < self.weight_holdout < 1:
            raise ConfigError("weight_holdout must lie in (0, 1)")
        if self.correlation_threshold is not None and not 0 < self.correlation_threshold <= 1:
            raise ConfigError("correlation_threshold must lie in (0, 1]")
        known = set(preset_names())
        unknown = [p for p in list(self.presets) + list(self.preset_overrides) if p not in known]
        if unknown:
            raise ConfigError(f"unknown presets {unknown}; available: {sorted(known)}")
        if not self.presets:
            raise ConfigError("at least one preset is required")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["gan"] = self.gan.to_dict()
        d["smote"] = asdict(self.smote)
        d["tune"] = asdict(self.tune)
        d["presets"] = list(self.presets)
        return d


def _build(cls, raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    extra = sorted(set(raw) - names)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {extra}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(raw: dict) -> PipelineConfig:
    raw = dict(raw)
    nested = {
        "gan": (GanConfig, "gan"),
        "smote": (SmoteConfig, "smote"),
        "tune": (TuneSettings, "tune"),
    }
    for key, (cls, where) in nested.items():
        if key in raw:
            raw[key] = _build(cls, raw[key], where)
    if "presets" in raw:
        raw["presets"] = tuple(raw["presets"])
    return _build(PipelineConfig, raw, "config")


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    cfg = config_from_dict(raw)
    # relative paths inside the config resolve against the config's folder
    if cfg.input and not Path(cfg.input).is_absolute():
        cfg.input = str(path.parent / cfg.input)
    if cfg.tune.space and not Path(cfg.tune.space).is_absolute():
        cfg.tune = replace(cfg.tune, space=str(path.parent / cfg.tune.space))
    return cfg
