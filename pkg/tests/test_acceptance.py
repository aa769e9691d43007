"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import json
import math
import time

import numpy as np
import pytest

from conftest import record_criterion
from datasets import has_witness_segment, near_duplicate_table, planted_table
from ensemble_props import check_config, random_config
from gradcheck import check_network
from prune_oracle import oracle, random_state
from quadratic import random_best, tpe_best
from schemas import validate_dir
from tree_oracle import best_split_bruteforce, random_case, xor_table
from synthbal import cli
from synthbal.data import Table, class_counts, prune_correlated, write_csv
from synthbal.hyperopt import median_prune_decision
from synthbal.learners import GbdtConfig, fit_boosting_tree, fit_gbdt
from synthbal.smote import SmoteConfig, smote_balance
from synthbal.tabgan import GanConfig, fidelity_report, sample_synthetic, train_gan

# (model, dataset) -> (accuracy %, RMSE) reference values
REFERENCE = {
    ("XGB", "Imbalanced"): (96.90, 0.175),
    ("XGB", "Balanced (SMOTE)"): (97.20, 0.166),
    ("XGB", "Balanced (GAN)"): (97.28, 0.164),
    ("LGBM", "Imbalanced"): (97.44, 0.159),
    ("LGBM", "Balanced (SMOTE)"): (96.43, 0.187),
    ("LGBM", "Balanced (GAN)"): (97.81, 0.147),
    ("ETC", "Imbalanced"): (96.93, 0.175),
    ("ETC", "Balanced (SMOTE)"): (96.93, 0.174),
    ("ETC", "Balanced (GAN)"): (97.63, 0.153),
    ("CatBoost", "Imbalanced"): (97.33, 0.163),
    ("CatBoost", "Balanced (SMOTE)"): (97.11, 0.169),
    ("CatBoost", "Balanced (GAN)"): (97.76, 0.149),
    ("GBC", "Imbalanced"): (97.06, 0.170),
    ("GBC", "Balanced (SMOTE)"): (97.02, 0.172),
    ("GBC", "Balanced (GAN)"): (97.60, 0.154),
    ("Weighted Ensembled", "Imbalanced"): (97.53, 0.156),
    ("Weighted Ensembled", "Balanced (SMOTE)"): (97.24, 0.165),
    ("Weighted Ensembled", "Balanced (GAN)"): (98.06, 0.138),
}
REFERENCE_ENSEMBLE_GAN = {"accuracy": 98.06, "weighted_f1": 98.04}


def verdict(number, checks, detail, elapsed, budget):
    checks = dict(checks)
    checks[f"runtime < {budget:g}s"] = elapsed < budget
    failed = [k for k, ok in checks.items() if not ok]
    text = f"{detail}; {elapsed:.1f}s" + (f"; failed: {', '.join(failed)}" if failed else "")
    record_criterion(number, not failed, text)
    assert not failed, text


# The reference RMSEs all sit slightly below sqrt(1 - accuracy), as expected
# if they were averaged per fold; this one cell misses the tolerance even
# after allowing for rounding of both printed values.
KNOWN_OUTLIERS = {("LGBM", "Balanced (SMOTE)")}


def test_criterion_1_rmse_accuracy_identity():
    start = time.perf_counter()
    gaps = {k: abs(rmse - math.sqrt(1 - acc / 100)) for k, (acc, rmse) in REFERENCE.items()}
    outside = {k for k, g in gaps.items() if g > 0.0015}
    worst = max(gaps, key=gaps.get)
    detail = (f"{18 - len(outside)}/18 reference pairs within 0.0015; max gap {gaps[worst]:.5f} "
              f"at {worst[0]} / {worst[1]}")
    elapsed = time.perf_counter() - start
    if outside and outside == KNOWN_OUTLIERS and elapsed < 1:
        record_criterion(1, False, f"{detail}; the reference values themselves break the tolerance")
        pytest.xfail("reference LGBM / Balanced (SMOTE) pair is off by 0.00194")
    verdict(1, {"18 pairs": len(gaps) == 18, "all within 0.0015": not outside}, detail, elapsed, 1)


def test_reference_pairs_follow_fold_averaging():
    # every other pair fits, and the bias has the sign fold averaging produces
    gaps = {k: math.sqrt(1 - acc / 100) - rmse for k, (acc, rmse) in REFERENCE.items()}
    assert all(g > 0 for g in gaps.values())
    assert all(g <= 0.0015 for k, g in gaps.items() if k not in KNOWN_OUTLIERS)


def test_criterion_2_pruning_fixture():
    start = time.perf_counter()
    t, expected = near_duplicate_table()
    pruned, report = prune_correlated(t, 0.95)
    verdict(2, {"128 input columns": t.col_count == 128, "keeps exactly 100": pruned.col_count == expected == 100},
            f"{t.col_count} -> {pruned.col_count} columns, {len(report.dropped)} dropped",
            time.perf_counter() - start, 5)


def test_criterion_3_smote_properties():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    no_witness = unequal = nondeterministic = 0
    for case in range(200):
        n_min = int(rng.integers(2, 16))
        n_maj = int(rng.integers(n_min + 1, 50))
        d = int(rng.integers(1, 5))
        x = np.vstack([rng.normal(size=(n_maj, d)), rng.normal(2.0, 1.0, size=(n_min, d))])
        if rng.uniform() < 0.3:
            x = np.round(x, 1)  # duplicates and ties
        y = np.r_[np.zeros(n_maj, int), np.ones(n_min, int)]
        t = Table(tuple(f"f{j}" for j in range(d)), x, y)
        cfg = SmoteConfig(k_neighbors=int(rng.integers(1, min(6, n_min))), seed=case,
                          scale=str(rng.choice(["none", "standard"])))
        out = smote_balance(t, cfg)
        counts = class_counts(out)
        unequal += counts[0] != counts[1]
        synthetic = out.features[t.row_count:]
        minority = t.features[t.labels == 1]
        no_witness += sum(not has_witness_segment(p, minority) for p in synthetic)
        again = smote_balance(t, cfg)
        nondeterministic += again.features.tobytes() != out.features.tobytes()
    verdict(3, {"witness for every row": no_witness == 0, "counts equal": unequal == 0,
                "byte-identical reruns": nondeterministic == 0},
            f"200 configurations; rows without witness {no_witness}, unequal {unequal}, "
            f"non-reproducible {nondeterministic}", time.perf_counter() - start, 30)


def test_criterion_4_gan_numerics():
    start = time.perf_counter()
    rng = np.random.default_rng(44)
    worst = max(max(check_network(rng).values()) for _ in range(20))
    passing = []
    for seed in range(5):
        r = np.random.default_rng(seed)
        x = r.multivariate_normal([1.0, -2.0], [[1.0, 0.6], [0.6, 1.0]], 500)
        real = Table(("a", "b"), x, np.ones(500, int))
        model = train_gan(real, GanConfig(seed=seed))
        rep = fidelity_report(real, sample_synthetic(model, 2000, seed=seed + 1))
        passing.append(bool(rep.mean_gap.max() <= 0.25 and rep.max_corr_gap < 0.15))
    verdict(4, {"gradient rel. error < 1e-4": worst < 1e-4, ">= 4 of 5 seeds": sum(passing) >= 4},
            f"max gradient rel. error {worst:.2e} over 20 nets; Gaussian fidelity passes "
            f"{sum(passing)}/5 seeds", time.perf_counter() - start, 180)


def test_criterion_5_tpe_quality():
    start = time.perf_counter()
    bests = [tpe_best(seed) for seed in range(20)]
    near = sum(abs(b.params["x"] - 2.0) <= 0.5 for b in bests)
    tpe_median = float(np.median([b.final_value for b in bests]))
    rnd_median = float(np.median([random_best(seed) for seed in range(20)]))
    rng = np.random.default_rng(55)
    mismatches = 0
    for _ in range(100):
        study, completed, step, value = random_state(rng)
        got = median_prune_decision(study, -1, step, value).value
        mismatches += got != oracle(study.direction, study.pruner.n_warmup_steps,
                                    study.pruner.n_min_trials, completed, step, value)
    verdict(5, {">= 18 of 20 near optimum": near >= 18, "TPE median >= random median": tpe_median >= rnd_median,
                "pruner matches oracle": mismatches == 0},
            f"{near}/20 seeds within 0.5; median best TPE {tpe_median:.2e} vs random {rnd_median:.2e}; "
            f"pruner mismatches {mismatches}/100", time.perf_counter() - start, 60)


def test_criterion_6_boosting_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(66)
    split_mismatch = 0
    for _ in range(100):
        x, g, h, alpha, lam, mcw = random_case(rng)
        tree = fit_boosting_tree(g, h, x, GbdtConfig(max_depth=1, l1_alpha=alpha, l2_lambda=lam,
                                                     min_child_weight=mcw))
        ref = best_split_bruteforce(x, g, h, alpha, lam, mcw)
        got = None if tree.n_nodes == 1 else (int(tree.feature[0]), float(tree.threshold[0]))
        split_mismatch += got != (None if ref is None else ref[1:])
    rises = 0
    for seed in range(5):
        r = np.random.default_rng(seed)
        x = r.normal(size=(200, 4))
        y = (x[:, 0] * x[:, 1] + 0.3 * r.normal(size=200) > 0).astype(int)
        loss = fit_gbdt(Table(("a", "b", "c", "d"), x, y),
                        GbdtConfig(n_estimators=30, max_depth=3)).history["train_logloss"]
        rises += sum(b > a + 1e-12 for a, b in zip(loss, loss[1:]))
    xor = xor_table(25)
    m = fit_gbdt(xor, GbdtConfig(order="first", max_depth=2, n_estimators=50, min_child_weight=0))
    xor_acc = float(np.mean(m.predict(xor.features) == xor.labels))
    verdict(6, {"splits match brute force": split_mismatch == 0, "logloss non-increasing": rises == 0,
                "XOR accuracy 1.0": xor_acc == 1.0},
            f"split mismatches {split_mismatch}/100; logloss increases {rises}; XOR x25 accuracy {xor_acc}",
            time.perf_counter() - start, 60)


def test_criterion_7_ensemble_invariants():
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    violations = 0
    for _ in range(1000):
        probas, w, labels = random_config(rng)
        c = float(np.exp(rng.uniform(-10, 10)))
        violations += len(check_config(probas, w, labels, c))
    verdict(7, {"no violations": violations == 0},
            f"1000 configurations, {violations} invariant violations", time.perf_counter() - start, 10)


BENCH_CONFIG = {
    "folds": 5,
    "seed": 0,
    "gan": {"epochs": 150},
    "preset_overrides": {
        "xgb-paper": {"n_estimators": 40, "max_depth": 6},
        "lgbm-paper": {"n_estimators": 40, "num_leaves": 31, "max_depth": 8},
        "etc-paper": {"n_estimators": 60},
        "catboost-paper": {"n_estimators": 40, "max_depth": 6, "colsample": 0.3},
        "gbc-paper": {"n_estimators": 40, "max_depth": 4},
    },
}


def column_mean(report, dataset, metric):
    return float(np.mean([c["metrics"][metric] for c in report["cells"] if c["dataset"] == dataset]))


@pytest.mark.slow
def test_criterion_8_end_to_end_bench(tmp_path):
    start = time.perf_counter()
    t = planted_table()
    write_csv(t, tmp_path / "planted.csv")
    (tmp_path / "cfg.json").write_text(json.dumps({"input": "planted.csv", **BENCH_CONFIG}))
    codes, artifacts = [], []
    for run in ("a", "b"):
        out = tmp_path / run
        codes.append(cli.main(["bench", "--config", str(tmp_path / "cfg.json"), "--out-dir", str(out)]))
        artifacts.append({n: (out / n).read_bytes() for n in ("bench.json", "bench.csv", "bench.txt")})
    report = json.loads(artifacts[0]["bench.json"])
    validated = validate_dir(tmp_path / "a")
    base_recall = column_mean(report, "Imbalanced", "recall")
    base_wf1 = column_mean(report, "Imbalanced", "weighted_f1")
    checks = {
        "4465 x 128 input (3000/1465)": (t.row_count, t.col_count, class_counts(t)) == (4465, 128, {0: 3000, 1: 1465}),
        "bench exits 0": codes == [0, 0],
        "schemas valid": validated == ["bench.json"],
        "byte-identical rerun": artifacts[0] == artifacts[1],
    }
    parts = [f"imbalanced recall {base_recall:.4f}, weighted F1 {base_wf1:.4f}"]
    for label in ("Balanced (SMOTE)", "Balanced (GAN)"):
        recall = column_mean(report, label, "recall")
        wf1 = column_mean(report, label, "weighted_f1")
        checks[f"{label} recall +2 points"] = recall - base_recall >= 0.02
        checks[f"{label} weighted F1 > imbalanced recall"] = wf1 > base_recall
        parts.append(f"{label}: recall {recall:.4f} ({100 * (recall - base_recall):+.2f} pts), "
                     f"weighted F1 {wf1:.4f} (vs imbalanced weighted F1 {wf1 - base_wf1:+.4f})")
    verdict(8, checks, "; ".join(parts), time.perf_counter() - start, 900)


def test_criterion_9_real_dataset(request, tmp_path):
    path = request.config.getoption("--input")
    if not path:
        record_criterion(9, "SKIP", "no --input CSV supplied")
        pytest.skip("conditional check needs --input")
    start = time.perf_counter()
    code = cli.main(["bench", "--input", path, "--paper-mode", "--out-dir", str(tmp_path)])
    report = json.loads((tmp_path / "bench.json").read_text())
    cell = next(c for c in report["cells"]
                if c["model"] == "Weighted Ensembled" and c["dataset"] == "Balanced (GAN)")
    got = {k: 100 * cell["metrics"][k] for k in REFERENCE_ENSEMBLE_GAN} if cell["metrics"] else {}
    checks = {"bench exits 0": code == 0}
    for k, target in REFERENCE_ENSEMBLE_GAN.items():
        checks[f"{k} within 2 points of {target}"] = k in got and abs(got[k] - target) <= 2.0
    detail = ", ".join(f"{k} {v:.2f}" for k, v in got.items()) or "ensemble GAN cell failed"
    verdict(9, checks, detail, time.perf_counter() - start, math.inf)
