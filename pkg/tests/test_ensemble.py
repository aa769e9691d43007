import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_props import check_config, random_config
from synthbal.data import Table
from synthbal.ensemble import (
    EnsembleModel,
    combine_hard,
    combine_soft,
    derive_weights,
    vote_hard,
    vote_soft,
)
from synthbal.errors import AllZeroScores
from synthbal.learners import GbdtConfig, fit_gbdt


class Fixed:
    """Member returning fixed probabilities regardless of input."""

    def __init__(self, p1):
        self.p1 = np.asarray(p1, dtype=float)

    def predict_proba(self, rows):
        return np.column_stack([1 - self.p1, self.p1])

    def predict(self, rows):
        return (self.p1 >= 0.5).astype(int)


def test_weights_are_scores_verbatim():
    scores = [0.9724, 0.9780, 0.9762, 0.9773, 0.9757]
    np.testing.assert_array_equal(derive_weights(scores), scores)
    assert derive_weights([0.7]).tolist() == [0.7]
    with pytest.raises(AllZeroScores):
        derive_weights([0, 0])
    with pytest.raises(AllZeroScores):
        derive_weights([])


def test_soft_vote_examples():
    members = [Fixed([0.4]), Fixed([0.8])]
    proba, label = vote_soft(members, [1, 1], None)
    np.testing.assert_allclose(proba, [[0.4, 0.6]])
    assert label.tolist() == [1]
    proba, label = vote_soft(members, [3, 1], None)
    np.testing.assert_allclose(proba, [[0.5, 0.5]])
    assert label.tolist() == [1]


def test_hard_vote_examples():
    assert combine_hard([[1], [1], [0]], [1, 1, 1]).tolist() == [1]
    assert combine_hard([[0], [1], [1]], [2, 1, 1]).tolist() == [1]
    assert combine_hard([[0], [1], [1]], [3, 1, 1]).tolist() == [0]
    assert vote_hard([Fixed([0.2, 0.9])], [0.5], None).tolist() == [0, 1]


def test_single_member_is_identity():
    m = Fixed([0.1, 0.5, 0.7])
    proba, labels = vote_soft([m], [0.8], None)
    np.testing.assert_allclose(proba, m.predict_proba(None))
    assert labels.tolist() == [0, 1, 1]


def test_equal_weights_give_plain_mean():
    rng = np.random.default_rng(0)
    p = rng.uniform(size=(4, 10))
    probas = np.stack([1 - p, p], axis=2)
    proba, _ = combine_soft(probas, [0.3] * 4)
    np.testing.assert_allclose(proba, probas.mean(axis=0))


def test_invalid_weights():
    with pytest.raises(ValueError):
        combine_hard([[1], [0]], [1])
    with pytest.raises(AllZeroScores):
        combine_hard([[1], [0]], [0, 0])
    with pytest.raises(AllZeroScores):
        combine_hard([[1], [0]], [1, -1])
    with pytest.raises(ValueError):
        EnsembleModel([Fixed([0.5])], [1.0], mode="stacked")


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 1e6))
def test_voting_invariants(seed, c):
    probas, w, labels = random_config(np.random.default_rng(seed))
    assert check_config(probas, w, labels, c) == []


def test_ensemble_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    x = rng.normal(size=(60, 3))
    t = Table(("a", "b", "c"), x, (x[:, 0] > 0).astype(int))
    members = [fit_gbdt(t, GbdtConfig(n_estimators=n, seed=n)) for n in (3, 5)]
    for mode in ("soft", "hard"):
        ens = EnsembleModel(members, [0.9, 0.8], mode, ["xgb", "lgbm"])
        path = ens.save(tmp_path / mode)
        back = EnsembleModel.load(path)
        assert back.names == ["xgb", "lgbm"] and back.mode == mode
        np.testing.assert_array_equal(back.predict(x), ens.predict(x))
        np.testing.assert_allclose(back.predict_proba(x), ens.predict_proba(x))
