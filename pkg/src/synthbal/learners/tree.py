"""Array-backed decision trees and the two growers that build them.

Rows with ``x[feature] < threshold`` go left, all others go right.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import (
    best_split_kernel,
    partition_kernel,
    random_tree_kernel,
    restrict_kernel,
)

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray  # LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes,) boosting or (n_nodes, 2) class frequencies
    gain: np.ndarray  # split gain / impurity decrease, 0 at leaves

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``x``."""
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            nd = node[active]
            go_left = x[active, self.feature[nd]] < self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.value[self.apply(x)]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=float),
            np.asarray(d["gain"], dtype=float),
        )


class _NodeList:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right = [], [], [], []
        self.value, self.gain = [], []

    def add(self, value) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        self.gain.append(0.0)
        return len(self.feature) - 1

    def split(self, node, feature, threshold, left, right, gain):
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = left
        self.right[node] = right
        self.gain[node] = gain

    def freeze(self) -> Tree:
        return Tree(
            np.asarray(self.feature, dtype=np.int64),
            np.asarray(self.threshold, dtype=float),
            np.asarray(self.left, dtype=np.int64),
            np.asarray(self.right, dtype=np.int64),
            np.asarray(self.value, dtype=float),
            np.asarray(self.gain, dtype=float),
        )


def midpoint(a: float, b: float) -> float:
    """Threshold strictly above ``a`` and at most ``b`` (for a < b)."""
    m = 0.5 * (a + b)
    return m if a < m <= b else b


# -- second-order boosting trees -------------------------------------------

def soft_threshold(g, alpha):
    if alpha <= 0:
        return g
    return np.sign(g) * np.maximum(np.abs(g) - alpha, 0.0)


def _score(g, h, l1, l2):
    """``T(G)^2 / (H + lambda)`` with empty denominators scoring 0."""
    tg = soft_threshold(g, l1)
    den = h + l2
    return np.divide(tg * tg, den, out=np.zeros_like(tg, dtype=float), where=den > 0)


def leaf_weight(g_sum, h_sum, l1=0.0, l2=0.0) -> float:
    """Newton leaf value ``-T(G) / (H + lambda)``."""
    den = h_sum + l2
    if den <= 0:
        return 0.0
    return float(-soft_threshold(np.float64(g_sum), l1) / den)


def split_gain(gl, hl, gr, hr, l1=0.0, l2=0.0):
    """Regularised second-order gain of splitting (G, H) into left/right."""
    return 0.5 * (
        _score(gl, hl, l1, l2) + _score(gr, hr, l1, l2) - _score(gl + gr, hl + hr, l1, l2)
    )


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = 6  # None or <= 0: unlimited
    num_leaves: Optional[int] = None
    growth: str = "depthwise"
    min_child_weight: float = 1.0
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    l1_alpha: float = 0.0
    l2_lambda: float = 1.0
    # accept zero-gain splits of nodes whose gradients still vary
    allow_zero_gain: bool = False


@dataclass
class _Pending:
    node: int
    depth: int
    sorted_rows: np.ndarray  # (f, m) row ids sorted by each candidate column
    g: float
    h: float
    best: Optional[tuple] = None  # (gain, col_pos, threshold, n_left)


def best_split(xt, g, h, sorted_rows, features, p: TreeParams):
    """Exact greedy search over one node.

    ``sorted_rows[j]`` lists the node's rows ordered by ``x[:, features[j]]``;
    ``xt`` is ``x.T`` in C order.
    Returns ``(gain, j, threshold, n_left)`` or None when no split has
    positive gain (or zero gain on a node with varying gradients, when
    ``p.allow_zero_gain``). Ties go to the lowest feature position, then the
    lowest threshold.
    """
    m = sorted_rows.shape[1]
    if m < max(2, p.min_samples_split) or m < 2 * p.min_samples_leaf:
        return None
    gain, j, pos = best_split_kernel(
        xt, g, h, sorted_rows, features,
        float(p.min_child_weight), int(p.min_samples_leaf),
        float(p.l1_alpha), float(p.l2_lambda),
    )
    if j < 0:
        return None
    if not gain > 0:
        r = sorted_rows[0]
        if not (p.allow_zero_gain and gain == 0 and np.ptp(g[r]) > 0):
            return None
    xc = xt[features[j]]
    thr = midpoint(xc[sorted_rows[j, pos]], xc[sorted_rows[j, pos + 1]])
    return float(gain), int(j), thr, int(pos) + 1


def _presort(x, rows, features):
    """Rows sorted by each of ``features`` (stable, so ties keep row order)."""
    sub = x[rows][:, features]
    return np.ascontiguousarray(rows[np.argsort(sub, axis=0, kind="stable")].T)


def _partition(sorted_rows, go_left_rows, n_left):
    return partition_kernel(sorted_rows, go_left_rows, n_left)


def restrict_sorted(sorted_rows, rows, n):
    """Keep only ``rows`` in every column of an (f, n) presorted index matrix."""
    if rows.size == n:
        return sorted_rows
    keep = np.zeros(n, dtype=bool)
    keep[rows] = True
    return restrict_kernel(sorted_rows, keep, rows.size)


def grow_boosting_tree(
    x,
    g_split,
    h_split,
    rows,
    features,
    p: TreeParams,
    g_leaf=None,
    h_leaf=None,
    sorted_rows=None,
) -> Tree:
    """Grow one regression tree on gradient statistics.

    Splits are chosen with ``(g_split, h_split)``; leaf values use
    ``(g_leaf, h_leaf)`` (defaulting to the split statistics), which lets a
    first-order learner fit residuals yet keep Newton leaf values.
    ``growth="leafwise"`` expands the highest-gain leaf first,
    ``"depthwise"`` goes level by level; both stop at ``num_leaves``.
    """
    g_leaf = g_split if g_leaf is None else g_leaf
    h_leaf = h_split if h_leaf is None else h_leaf
    features = np.asarray(features, dtype=np.int64)
    rows = np.asarray(rows, dtype=np.int64)
    if sorted_rows is None:
        sorted_rows = _presort(x, rows, features)
    xt = np.ascontiguousarray(x.T)
    max_depth = p.max_depth if p.max_depth and p.max_depth > 0 else np.inf
    max_leaves = p.num_leaves if p.num_leaves and p.num_leaves > 0 else np.inf
    nodes = _NodeList()
    go_left = np.zeros(x.shape[0], dtype=bool)

    def make(rows_sorted, depth):
        r = rows_sorted[0]
        node = nodes.add(leaf_weight(g_leaf[r].sum(), h_leaf[r].sum(), p.l1_alpha, p.l2_lambda))
        pend = _Pending(node, depth, rows_sorted, g_split[r].sum(), h_split[r].sum())
        if depth < max_depth:
            pend.best = best_split(xt, g_split, h_split, rows_sorted, features, p)
        return pend

    root = make(sorted_rows, 0)
    n_leaves = 1
    counter = 0
    # heap entries: (priority, tiebreak, pending)
    heap = []

    def push(pend):
        nonlocal counter
        if pend.best is None:
            return
        prio = -pend.best[0] if p.growth == "leafwise" else counter
        heapq.heappush(heap, (prio, counter, pend))
        counter += 1

    push(root)
    while heap and n_leaves < max_leaves:
        _, _, pend = heapq.heappop(heap)
        gain, j, thr, n_left = pend.best
        f = features[j]
        r = pend.sorted_rows[j]
        mask = xt[f, r] < thr
        if pend.depth + 1 >= max_depth:
            # children become leaves; one sorted column is enough
            left_rows, right_rows = r[mask][None, :], r[~mask][None, :]
        else:
            go_left[r] = mask
            left_rows, right_rows = _partition(pend.sorted_rows, go_left, n_left)
            go_left[r] = False
        left = make(left_rows, pend.depth + 1)
        right = make(right_rows, pend.depth + 1)
        nodes.split(pend.node, int(f), thr, left.node, right.node, gain)
        n_leaves += 1
        push(left)
        push(right)
    return nodes.freeze()


# -- extremely randomized classification trees ----------------------------

def grow_random_tree(x, y, rows, max_features: int, min_samples_split: int, seed: int,
                     max_depth: Optional[int] = None) -> Tree:
    """Grow an extremely randomised tree on class labels ``y``.

    At each node up to ``max_features`` non-constant features are tried,
    each with one threshold drawn uniformly between the node's min and max;
    the candidate with the largest weighted Gini decrease wins. Leaves hold
    class frequencies. ``seed`` fully determines the tree.
    """
    arrays = random_tree_kernel(
        np.ascontiguousarray(x, dtype=float),
        np.asarray(y, dtype=np.int64),
        np.asarray(rows, dtype=np.int64),
        int(max_features),
        int(min_samples_split),
        int(max_depth or 0),
        int(seed),
    )
    return Tree(*(np.array(a) for a in arrays))
