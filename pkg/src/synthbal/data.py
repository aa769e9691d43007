"""Tabular dataset carrier plus ingestion, pruning, splitting and folding."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateSplit,
    InvalidLabel,
    MalformedCsv,
    MissingFile,
    MissingLabelColumn,
    MissingValue,
    NonNumericCell,
    ShapeMismatch,
    TooFewRowsPerClass,
)

logger = logging.getLogger(__name__)

DEFAULT_LABEL = "Label"
_MISSING_TOKENS = {"", "na", "nan", "null", "none", "?"}


@dataclass(frozen=True)
class Table:
    """Dense feature matrix with a binary label vector.

    The arrays are copied and marked read-only on construction, so a Table
    can be shared freely.
    """

    feature_names: tuple
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.feature_names)
        feats = np.array(self.features, dtype=float, copy=True)
        if feats.ndim == 1 and feats.size == 0:
            feats = feats.reshape(0, len(names))
        if feats.ndim != 2:
            raise ShapeMismatch(f"features must be 2-D, got shape {feats.shape}")
        labels = np.array(self.labels, copy=True).astype(np.int64).reshape(-1)
        if feats.shape[0] != labels.shape[0]:
            raise ShapeMismatch(
                f"{feats.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if feats.shape[1] != len(names):
            raise ShapeMismatch(
                f"{len(names)} feature names for {feats.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise ShapeMismatch("feature names must be unique")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if labels.size and not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def row_count(self) -> int:
        return self.features.shape[0]

    @property
    def col_count(self) -> int:
        return self.features.shape[1]

    def take(self, rows) -> "Table":
        rows = np.asarray(rows)
        return Table(self.feature_names, self.features[rows], self.labels[rows])

    def select_columns(self, cols) -> "Table":
        cols = list(cols)
        return Table(
            [self.feature_names[c] for c in cols], self.features[:, cols], self.labels
        )

    def with_rows(self, features, labels) -> "Table":
        """Return a new table with extra rows appended after the existing ones."""
        features = np.asarray(features, dtype=float).reshape(-1, self.col_count)
        return Table(
            self.feature_names,
            np.vstack([self.features, features]),
            np.concatenate([self.labels, np.asarray(labels, dtype=np.int64)]),
        )

    def class_rows(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


def concat(a: Table, b: Table) -> Table:
    if a.feature_names != b.feature_names:
        raise ShapeMismatch("cannot concatenate tables with different columns")
    return a.with_rows(b.features, b.labels)


# -- CSV -------------------------------------------------------------------

def _parse_number(text, row, col):
    token = text.strip()
    if token.lower() in _MISSING_TOKENS:
        raise MissingValue(row, col)
    try:
        value = float(token)
    except ValueError:
        raise NonNumericCell(row, col, text) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, col, text)
    return value


def load_csv(path, label_column: str = DEFAULT_LABEL) -> Table:
    """Read a headered numeric CSV into a :class:`Table`.

    Error positions are 1-based: ``row`` counts data rows (header excluded)
    and ``col`` counts file columns.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path} is empty (no header row)") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingLabelColumn(label_column, path)
        label_idx = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_idx]
        rows, labels = [], []
        for r, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(header):
                raise MalformedCsv(
                    f"row {r} has {len(record)} fields, header has {len(header)}"
                )
            values = []
            for c, cell in enumerate(record):
                if c == label_idx:
                    lab = _parse_number(cell, r, c + 1)
                    if lab not in (0.0, 1.0):
                        raise InvalidLabel(r, cell)
                    labels.append(int(lab))
                else:
                    values.append(_parse_number(cell, r, c + 1))
            rows.append(values)
    feats = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return Table(names, feats, np.array(labels, dtype=np.int64))


def write_csv(t: Table, path, label_column: str = DEFAULT_LABEL) -> None:
    """Write ``t`` with the label as the last column; floats use shortest repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(t.feature_names) + [label_column])
        for x, y in zip(t.features, t.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


# -- summaries -------------------------------------------------------------

def class_counts(t: Table) -> dict:
    return {0: int(np.sum(t.labels == 0)), 1: int(np.sum(t.labels == 1))}


def constant_columns(t: Table) -> list:
    if t.row_count == 0:
        return list(range(t.col_count))
    return [int(c) for c in np.flatnonzero(np.ptp(t.features, axis=0) == 0)]


def pearson_correlation(t: Table) -> np.ndarray:
    """Pairwise Pearson correlation of the feature columns.

    A constant column correlates 0 with everything else and 1 with itself.
    """
    if t.row_count < 2:
        raise ValueError("correlation needs at least 2 rows")
    x = t.features
    centered = x - x.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    const = norms == 0
    if const.any():
        logger.warning(
            "constant columns have undefined correlation, using 0: %s",
            [t.feature_names[i] for i in np.flatnonzero(const)],
        )
    safe = np.where(const, 1.0, norms)
    z = centered / safe
    r = z.T @ z
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    r[const, :] = 0.0
    r[:, const] = 0.0
    np.fill_diagonal(r, 1.0)
    return r


@dataclass
class PruneReport:
    threshold: float
    dropped: list = field(default_factory=list)  # (kept, dropped, r)
    remaining_names: list = field(default_factory=list)

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "dropped": [
                {"kept": k, "dropped": d, "correlation": r} for k, d, r in self.dropped
            ],
            "remaining_names": list(self.remaining_names),
        }


def prune_correlated(t: Table, threshold: float = 0.95, absolute: bool = True):
    """Drop the later column of every pair whose correlation exceeds ``threshold``.

    Columns are visited left to right and each is compared only with the
    columns already kept.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    r = pearson_correlation(t)
    score = np.abs(r) if absolute else r
    kept: list[int] = []
    report = PruneReport(threshold=threshold)
    for j in range(t.col_count):
        hits = [i for i in kept if score[i, j] > threshold]
        if hits:
            i = hits[0]
            report.dropped.append(
                (t.feature_names[i], t.feature_names[j], float(r[i, j]))
            )
        else:
            kept.append(j)
    pruned = t.select_columns(kept)
    report.remaining_names = list(pruned.feature_names)
    return pruned, report


# -- folds and splits ------------------------------------------------------

@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of_row: np.ndarray

    def validation_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row == fold)

    def training_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row != fold)


def stratified_kfold(t: Table, k: int = 10, seed: int = 0) -> FoldAssignment:
    """Shuffle each class separately and deal its rows round-robin into folds.

    The dealing position carries over from one class to the next, which keeps
    total fold sizes within one row of each other.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    counts = class_counts(t)
    for label, n in counts.items():
        if n < k:
            raise TooFewRowsPerClass(
                f"class {label} has {n} rows, fewer than k={k} folds"
            )
    folds = np.empty(t.row_count, dtype=np.int64)
    offset = 0
    for label in (0, 1):
        rng = np.random.default_rng([seed, label])
        rows = rng.permutation(t.class_rows(label))
        folds[rows] = (offset + np.arange(rows.size)) % k
        offset = (offset + rows.size) % k
    return FoldAssignment(k, folds)


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(t: Table, test_fraction: float, seed: int = 0):
    """Split into (train, test) keeping each class's share of rows.

    Each class contributes ``round(n_class * test_fraction)`` rows (half-up).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    train_idx, test_idx = [], []
    for label in (0, 1):
        rows = t.class_rows(label)
        if rows.size == 0:
            continue
        n_test = _half_up(rows.size * test_fraction)
        if n_test == 0 or n_test == rows.size:
            raise DegenerateSplit(
                f"class {label} ({rows.size} rows) leaves an empty side at "
                f"test_fraction={test_fraction}"
            )
        rng = np.random.default_rng([seed, label])
        rows = rng.permutation(rows)
        test_idx.append(rows[:n_test])
        train_idx.append(rows[n_test:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return t.take(train_idx), t.take(test_idx)
