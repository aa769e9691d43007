"""Command-line pipeline: inspect, prune, balance, tune, train, evaluate, bench.

Exit codes: 0 success, 2 input/config problems, 3 sampling failure,
4 tuning failure, 5 one or more bench cells failed, 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bench import fit_weighted_ensemble, run_bench, write_report
from .config import ConfigError, PipelineConfig, load_config
from .data import (
    Table,
    class_counts,
    concat,
    constant_columns,
    load_csv,
    prune_correlated,
    write_csv,
)
from .ensemble import EnsembleModel
from .errors import IngestionError, SamplingError, TuningError
from .hyperopt import TrialState, best_trial, run_study
from .learners import TrainedModel
from .learners.presets import get_preset, preset_names
from .metrics import SamplingPolicy, binary_metrics
from .tabgan import fidelity_report, sample_synthetic, train_gan
from .tuning import default_space, gan_objective, model_objective, new_study, read_space

logger = logging.getLogger("synthbal")

EXIT_OK, EXIT_UNEXPECTED, EXIT_INGESTION, EXIT_SAMPLING, EXIT_TUNING, EXIT_BENCH = 0, 1, 2, 3, 4, 5


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(cfg: PipelineConfig, prune: bool = True):
    """Read the input table and drop correlated columns when configured."""
    t = load_csv(cfg.input, cfg.label_column)
    report = None
    if prune and cfg.correlation_threshold is not None:
        t, report = prune_correlated(t, cfg.correlation_threshold)
        logger.info("pruned %d correlated columns, %d remain", len(report.dropped), t.col_count)
    return t, report


def summarize(t: Table, source: str) -> dict:
    counts = class_counts(t)
    n = max(t.row_count, 1)
    return {
        "format": "synthbal.summary/1",
        "input": source,
        "rows": t.row_count,
        "columns": t.col_count,
        "class_counts": {str(k): int(v) for k, v in sorted(counts.items())},
        "class_percentages": {str(k): round(100.0 * v / n, 1) for k, v in sorted(counts.items())},
        "constant_columns": [t.feature_names[j] for j in constant_columns(t)],
    }


# -- commands --------------------------------------------------------------

def cmd_inspect(cfg: PipelineConfig) -> int:
    t, _ = _load(cfg, prune=False)
    summary = summarize(t, Path(cfg.input).name)
    _write_json(_out_dir(cfg) / "summary.json", summary)
    pct = summary["class_percentages"]
    line = ", ".join(f"{k}: {v} ({pct[k]:.1f}%)" for k, v in summary["class_counts"].items())
    print(f"{summary['rows']} rows, {summary['columns']} feature columns")
    print(line)
    if summary["constant_columns"]:
        print("constant columns: " + ", ".join(summary["constant_columns"]))
    return EXIT_OK


def cmd_prune(cfg: PipelineConfig) -> int:
    if cfg.correlation_threshold is None:
        raise ConfigError("correlation_threshold is disabled; nothing to prune")
    t, report = _load(cfg)
    out = _out_dir(cfg)
    write_csv(t, out / "pruned.csv", cfg.label_column)
    _write_json(out / "prune_report.json", {"format": "synthbal.prune/1", **report.to_dict()})
    print(f"kept {t.col_count} columns, dropped {len(report.dropped)}")
    return EXIT_OK


def cmd_balance(cfg: PipelineConfig) -> int:
    t, _ = _load(cfg)
    out = _out_dir(cfg)
    counts = class_counts(t)
    if counts.get(0, 0) == counts.get(1, 0) or cfg.sampling == "none":
        if cfg.sampling != "none":
            logger.warning("input is already balanced; writing an unchanged copy")
        write_csv(t, out / "balanced.csv", cfg.label_column)
        return EXIT_OK
    if cfg.sampling == "smote":
        balanced = SamplingPolicy("smote", cfg.smote).apply(t)
    else:
        minority = min(counts, key=lambda k: (counts[k], k))
        real = t.take(t.class_rows(minority))
        n_new = abs(counts[0] - counts[1])
        model = train_gan(real, cfg.gan)
        synthetic = sample_synthetic(model, n_new, seed=cfg.gan.seed + 1)
        balanced = concat(t, synthetic)
        model.save(out / "gan_model.json")
        fidelity = fidelity_report(real, synthetic).to_dict(real.feature_names)
        _write_json(out / "fidelity.json", {
            "format": "synthbal.fidelity/1",
            "minority_label": int(minority),
            "real_rows": real.row_count,
            "synthetic_rows": synthetic.row_count,
            **fidelity,
        })
    write_csv(balanced, out / "balanced.csv", cfg.label_column)
    after = class_counts(balanced)
    print(f"wrote {balanced.row_count} rows: " + ", ".join(f"{k}: {v}" for k, v in sorted(after.items())))
    return EXIT_OK


def cmd_tune(cfg: PipelineConfig) -> int:
    ts = cfg.tune
    if ts.n_trials < 1:
        raise TuningError("empty study: n_trials must be >= 1")
    t, _ = _load(cfg)
    space = read_space(ts.space) if ts.space else default_space(ts.target)
    if ts.target == "gan":
        objective = gan_objective(t, space, cfg.gan, ts.fidelity_sample, cfg.seed)
    else:
        objective = model_objective(t, ts.target, space, ts.folds, cfg.seed,
                                    cfg.preset_overrides.get(ts.target))
    study = run_study(objective, ts.n_trials, new_study(ts.target, cfg.seed), cfg.jobs)
    out = _out_dir(cfg)
    study.save(out / "study.json")
    best = best_trial(study)
    states = {s.value: sum(tr.state is s for tr in study.trials) for s in TrialState}
    params = {k: list(v) if isinstance(v, tuple) else v for k, v in best.params.items()}
    _write_json(out / "best_params.json", {
        "format": "synthbal.best_params/1",
        "target": ts.target,
        "objective": "neg_fidelity_gap" if ts.target == "gan" else "mean_cv_weighted_f1",
        "direction": study.direction,
        "trial": best.id,
        "value": best.final_value,
        "params": params,
        "trial_states": states,
    })
    print(f"best trial {best.id}: value {best.final_value:.6f}")
    for k, v in params.items():
        print(f"  {k} = {v}")
    return EXIT_OK


def _policy(cfg: PipelineConfig) -> SamplingPolicy:
    return SamplingPolicy(cfg.sampling, {"none": None, "smote": cfg.smote, "gan": cfg.gan}[cfg.sampling])


def cmd_train(cfg: PipelineConfig, model: str = "ensemble") -> int:
    """Fit one preset or the weighted ensemble on the whole (balanced) input."""
    if model != "ensemble" and model not in preset_names():
        raise ConfigError(f"unknown model {model!r}; use 'ensemble' or one of {preset_names()}")
    t, _ = _load(cfg)
    train = _policy(cfg).apply(t, seed=cfg.seed)
    out = _out_dir(cfg)
    if model == "ensemble":
        presets = [get_preset(n, cfg.preset_overrides.get(n)) for n in cfg.presets]
        ens = fit_weighted_ensemble(train, presets, cfg.ensemble_mode, cfg.weight_holdout, cfg.seed)
        model_file = ens.save(out / "model").relative_to(out)
        weights = {n: float(w) for n, w in zip(ens.names, ens.weights)}
    else:
        fitted = get_preset(model, cfg.preset_overrides.get(model)).fit(train)
        fitted.save(out / "model.json")
        model_file, weights = Path("model.json"), None
    _write_json(out / "trained.json", {
        "format": "synthbal.trained/1",
        "model": model,
        "model_file": model_file.as_posix(),
        "sampling": cfg.sampling,
        "label_column": cfg.label_column,
        "feature_names": list(t.feature_names),
        "train_rows": train.row_count,
        "weights": weights,
    })
    print(f"trained {model} on {train.row_count} rows, {t.col_count} columns")
    return EXIT_OK


def load_trained(path):
    """Load a ``trained.json`` manifest and the model it points to."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"trained model manifest not found: {path}")
    info = json.loads(path.read_text())
    target = path.parent / info["model_file"]
    model = EnsembleModel.load(target) if info["model"] == "ensemble" else TrainedModel.load(target)
    return info, model


def cmd_evaluate(cfg: PipelineConfig, model_path: str) -> int:
    """Score a trained model on the input's real rows."""
    info, model = load_trained(model_path)
    t = load_csv(cfg.input, info["label_column"])
    index = {n: j for j, n in enumerate(t.feature_names)}
    missing = [n for n in info["feature_names"] if n not in index]
    if missing:
        raise IngestionError(f"input lacks columns the model was trained on: {missing[:5]}")
    t = t.select_columns([index[n] for n in info["feature_names"]])
    report = binary_metrics(t.labels, model.predict(t.features))
    _write_json(_out_dir(cfg) / "metrics.json", {
        "format": "synthbal.metrics/1",
        "input": Path(cfg.input).name,
        "model": info["model"],
        "metrics": report.to_dict(),
    })
    for k in ("accuracy", "precision", "recall", "f1", "weighted_f1", "rmse"):
        print(f"{k}: {getattr(report, k):.6f}")
    return EXIT_OK


def cmd_bench(cfg: PipelineConfig) -> int:
    t, prune_report = _load(cfg)
    info = summarize(t, Path(cfg.input).name)
    info.pop("format")
    if prune_report is not None:
        info["pruned_columns"] = len(prune_report.dropped)
    report = run_bench(t, cfg, info)
    paths = write_report(report, _out_dir(cfg))
    print(paths["bench.txt"].read_text(), end="")
    if report.failed:
        logger.error("%d bench cells failed", len(report.failed))
        return EXIT_BENCH
    return EXIT_OK


COMMANDS = {
    "inspect": cmd_inspect,
    "prune": cmd_prune,
    "balance": cmd_balance,
    "tune": cmd_tune,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


# -- argument handling -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config file")
    common.add_argument("--input", help="input CSV (overrides the config)")
    common.add_argument("--label-column", help="name of the 0/1 label column")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="parallel workers (1 = reproducible)")
    common.add_argument("--out-dir")
    common.add_argument("--paper-mode", action="store_true", default=None,
                        help="balance before folding (synthetic rows reach validation)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="synthbal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("inspect", parents=[common], help="row/class/constant-column summary")
    sub.add_parser("prune", parents=[common], help="drop highly correlated columns")
    p = sub.add_parser("balance", parents=[common], help="oversample the minority class")
    p.add_argument("--sampling", choices=["none", "smote", "gan"])
    p = sub.add_parser("tune", parents=[common], help="hyperparameter search")
    p.add_argument("--target", help="'gan' or a preset name")
    p.add_argument("--n-trials", type=int)
    p.add_argument("--space", help="JSON search-space file")
    p = sub.add_parser("train", parents=[common], help="fit a preset or the weighted ensemble")
    p.add_argument("--sampling", choices=["none", "smote", "gan"])
    p.add_argument("--model", default="ensemble", help="'ensemble' or a preset name")
    p = sub.add_parser("evaluate", parents=[common], help="score a trained model on a CSV")
    p.add_argument("--model", required=True, help="trained.json written by 'train'")
    sub.add_parser("bench", parents=[common], help="three-way benchmark")
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    direct = {
        "input": args.input,
        "label_column": args.label_column,
        "seed": args.seed,
        "jobs": args.jobs,
        "out_dir": args.out_dir,
        "paper_mode": args.paper_mode,
        "sampling": getattr(args, "sampling", None),
    }
    cfg = replace(cfg, **{k: v for k, v in direct.items() if v is not None})
    tune = {
        "target": getattr(args, "target", None),
        "n_trials": getattr(args, "n_trials", None),
        "space": getattr(args, "space", None),
    }
    cfg.tune = replace(cfg.tune, **{k: v for k, v in tune.items() if v is not None})
    if args.seed is not None:
        # one flag reseeds every stochastic stage
        cfg.gan = replace(cfg.gan, seed=args.seed)
        cfg.smote = replace(cfg.smote, seed=args.seed)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "tune":
            target = cfg.tune.target
            if target != "gan" and target not in preset_names():
                raise ConfigError(f"unknown tuning target {target!r}")
        if args.command in ("train", "evaluate"):
            return COMMANDS[args.command](cfg, args.model)
        return COMMANDS[args.command](cfg)
    except (IngestionError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except SamplingError as exc:
        print(f"sampling failed: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except TuningError as exc:
        print(f"tuning failed: {exc}", file=sys.stderr)
        return EXIT_TUNING
    except Exception as exc:  # the documented catch-all exit code
        logger.debug("unexpected failure", exc_info=True)
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
