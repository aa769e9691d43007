"""Brute-force references for the boosting trees."""
import numpy as np


def soft(g, alpha):
    return np.sign(g) * max(abs(g) - alpha, 0.0)


def score(g, h, alpha, lam):
    den = h + lam
    return soft(g, alpha) ** 2 / den if den > 0 else 0.0


def best_split_bruteforce(x, g, h, alpha, lam, min_child_weight=0.0):
    """Exhaustive search; returns (gain, feature, threshold) or None."""
    best = None
    G, H = g.sum(), h.sum()
    parent = score(G, H, alpha, lam)
    for f in range(x.shape[1]):
        values = np.unique(x[:, f])
        for a, b in zip(values[:-1], values[1:]):
            thr = 0.5 * (a + b)
            left = x[:, f] < thr
            hl, hr = h[left].sum(), h[~left].sum()
            if hl < min_child_weight or hr < min_child_weight:
                continue
            gain = 0.5 * (score(g[left].sum(), hl, alpha, lam)
                          + score(g[~left].sum(), hr, alpha, lam) - parent)
            # strict improvement keeps the lowest feature, then lowest threshold
            if gain > 0 and (best is None or gain > best[0] * (1 + 1e-12) + 1e-15):
                best = (gain, f, thr)
    return best


def random_case(rng):
    n = int(rng.integers(5, 201))
    d = int(rng.integers(1, 6))
    # a coarse grid puts ties in the feature values
    x = np.round(rng.normal(size=(n, d)), int(rng.integers(0, 3)))
    g = rng.normal(size=n)
    h = rng.uniform(0.05, 1.0, n)
    alpha = float(rng.choice([0.0, 0.0, rng.uniform(0, 1)]))
    lam = float(rng.choice([0.0, 1.0, rng.uniform(0, 5)]))
    mcw = float(rng.choice([0.0, rng.uniform(0, 3)]))
    return x, g, h, alpha, lam, mcw


def margin_by_traversal(model, rows):
    """Re-sum per-tree leaf values by walking each tree node by node."""
    out = []
    for row in rows:
        total = model.base_score
        for tree in model.trees[: model.n_used_trees]:
            node = 0
            while tree.feature[node] != -1:
                f = tree.feature[node]
                node = tree.left[node] if row[f] < tree.threshold[node] else tree.right[node]
            total += model.learning_rate * tree.value[node]
        out.append(total)
    return np.array(out)


def xor_table(reps=25):
    from synthbal.data import Table

    base = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=float)
    y = np.array([0, 0, 1, 1])
    return Table(("a", "b"), np.tile(base, (reps, 1)), np.tile(y, reps))
