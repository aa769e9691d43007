"""Weighted soft/hard voting over fitted models."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AllZeroScores
from .learners.model import TrainedModel

MODES = ("soft", "hard")
TIE_TOL = 1e-12  # relative margin under which a vote counts as tied


def derive_weights(member_scores, transform: str = "raw") -> np.ndarray:
    """Voting weights from per-member weighted-F1 scores.

    ``"raw"`` uses the scores as they are (voting is scale-invariant);
    ``"normalized"`` divides by their sum.
    """
    scores = np.asarray(member_scores, dtype=float)
    if scores.size == 0 or np.any(scores < 0) or not np.any(scores > 0):
        raise AllZeroScores("need at least one positive member score")
    if transform == "raw":
        return scores.copy()
    if transform == "normalized":
        return scores / scores.sum()
    raise ValueError(f"unknown weight transform {transform!r}")


def _check_weights(weights, n_members):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n_members,):
        raise ValueError(f"{n_members} members but {w.size} weights")
    if np.any(w < 0) or not np.any(w > 0):
        raise AllZeroScores("weights must be non-negative with at least one positive")
    return w


def combine_soft(member_probas, weights):
    """Weighted mean of ``(n_members, n_rows, 2)`` probabilities.

    Returns ``(proba, labels)``; a 0.5/0.5 tie goes to class 1. Ties are
    judged with a relative tolerance of ``TIE_TOL`` so that rescaling the
    weights cannot flip a label through rounding.
    """
    probas = np.asarray(member_probas, dtype=float)
    w = _check_weights(weights, probas.shape[0])
    proba = np.tensordot(w, probas, axes=1) / w.sum()
    labels = (proba[:, 1] - proba[:, 0] >= -TIE_TOL).astype(np.int64)
    return proba, labels


def combine_hard(member_labels, weights):
    """Weighted majority of ``(n_members, n_rows)`` 0/1 votes; ties go to 1."""
    votes = np.asarray(member_labels, dtype=np.int64)
    w = _check_weights(weights, votes.shape[0])
    for_one = w @ (votes == 1)
    for_zero = w @ (votes == 0)
    return (for_one - for_zero >= -TIE_TOL * w.sum()).astype(np.int64)


def vote_soft(members, weights, rows):
    return combine_soft([m.predict_proba(rows) for m in members], weights)


def vote_hard(members, weights, rows):
    return combine_hard([m.predict(rows) for m in members], weights)


@dataclass
class EnsembleModel:
    members: list
    weights: np.ndarray
    mode: str = "soft"
    names: list = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.weights = _check_weights(self.weights, len(self.members))
        if self.names is None:
            self.names = [f"member{i}" for i in range(len(self.members))]

    def predict_proba(self, rows) -> np.ndarray:
        return vote_soft(self.members, self.weights, rows)[0]

    def predict(self, rows) -> np.ndarray:
        if self.mode == "soft":
            return vote_soft(self.members, self.weights, rows)[1]
        return vote_hard(self.members, self.weights, rows)

    def save(self, directory) -> Path:
        """Write one JSON file per member plus ``ensemble.json`` manifest."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = []
        for name, m in zip(self.names, self.members):
            fname = f"{name}.model.json"
            m.save(directory / fname)
            files.append(fname)
        manifest = {
            "format": "synthbal.ensemble/1",
            "mode": self.mode,
            "members": [
                {"name": n, "file": f, "weight": float(w)}
                for n, f, w in zip(self.names, files, self.weights)
            ],
        }
        path = directory / "ensemble.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n")
        return path

    @classmethod
    def load(cls, manifest_path) -> "EnsembleModel":
        manifest_path = Path(manifest_path)
        d = json.loads(manifest_path.read_text())
        members = [TrainedModel.load(manifest_path.parent / m["file"]) for m in d["members"]]
        return cls(
            members,
            np.array([m["weight"] for m in d["members"]]),
            d["mode"],
            [m["name"] for m in d["members"]],
        )
