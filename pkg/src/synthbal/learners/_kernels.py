"""Compiled inner loops for split search and random-tree growth."""
import numpy as np
from numba import njit


@njit(cache=True)
def _soft(g, alpha):
    if alpha <= 0.0:
        return g
    if g > alpha:
        return g - alpha
    if g < -alpha:
        return g + alpha
    return 0.0


@njit(cache=True)
def _score(g, h, l1, l2):
    den = h + l2
    if den <= 0.0:
        return 0.0
    t = _soft(g, l1)
    return t * t / den


@njit(cache=True)
def best_split_kernel(xt, g, h, sorted_rows, features, min_child_weight,
                      min_samples_leaf, l1, l2):
    """Return (gain, column position, split position); gain <= 0 means none.

    ``xt`` is the transposed feature matrix and ``sorted_rows`` is (f, m).
    """
    f, m = sorted_rows.shape
    g_tot = 0.0
    h_tot = 0.0
    for i in range(m):
        r = sorted_rows[0, i]
        g_tot += g[r]
        h_tot += h[r]
    parent = _score(g_tot, h_tot, l1, l2)
    best_gain = -np.inf
    best_j = -1
    best_pos = -1
    for j in range(f):
        xc = xt[features[j]]
        rows = sorted_rows[j]
        gl = 0.0
        hl = 0.0
        for i in range(m - 1):
            r = rows[i]
            gl += g[r]
            hl += h[r]
            n_left = i + 1
            if xc[r] >= xc[rows[i + 1]]:
                continue
            if n_left < min_samples_leaf or m - n_left < min_samples_leaf:
                continue
            hr = h_tot - hl
            if hl < min_child_weight or hr < min_child_weight:
                continue
            gain = 0.5 * (_score(gl, hl, l1, l2) + _score(g_tot - gl, hr, l1, l2) - parent)
            if gain > best_gain:
                best_gain = gain
                best_j = j
                best_pos = i
    return best_gain, best_j, best_pos


@njit(cache=True)
def partition_kernel(sorted_rows, go_left, n_left):
    f, m = sorted_rows.shape
    left = np.empty((f, n_left), dtype=sorted_rows.dtype)
    right = np.empty((f, m - n_left), dtype=sorted_rows.dtype)
    for j in range(f):
        a = 0
        b = 0
        for i in range(m):
            r = sorted_rows[j, i]
            if go_left[r]:
                left[j, a] = r
                a += 1
            else:
                right[j, b] = r
                b += 1
    return left, right


@njit(cache=True)
def restrict_kernel(sorted_rows, keep, n_keep):
    f, m = sorted_rows.shape
    out = np.empty((f, n_keep), dtype=sorted_rows.dtype)
    for j in range(f):
        a = 0
        for i in range(m):
            r = sorted_rows[j, i]
            if keep[r]:
                out[j, a] = r
                a += 1
    return out


@njit(cache=True)
def _gini_weighted(n, n1):
    if n == 0:
        return 0.0
    p1 = n1 / n
    p0 = 1.0 - p1
    return n * (1.0 - p0 * p0 - p1 * p1)


@njit(cache=True)
def random_tree_kernel(x, y, rows_in, max_features, min_samples_split, max_depth, seed):
    """Grow one extremely randomised tree; returns flat node arrays."""
    np.random.seed(seed)
    n_rows = rows_in.size
    d = x.shape[1]
    cap = 2 * n_rows + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, 2))
    gain = np.zeros(cap)
    rows = rows_in.copy()
    perm = np.arange(d)

    # stack of (node, start, end, depth)
    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    sp = 0
    n_nodes = 1
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n_rows
    st_depth[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        s = st_start[sp]
        e = st_end[sp]
        depth = st_depth[sp]
        m = e - s
        n1 = 0
        for i in range(s, e):
            n1 += y[rows[i]]
        if m > 0:
            value[node, 1] = n1 / m
            value[node, 0] = 1.0 - n1 / m
        else:
            value[node, 0] = 0.5
            value[node, 1] = 0.5
        if m < min_samples_split or m < 2 or n1 == 0 or n1 == m:
            continue
        if max_depth > 0 and depth >= max_depth:
            continue
        parent = _gini_weighted(m, n1)
        best = -np.inf
        best_f = -1
        best_t = 0.0
        tried = 0
        # lazily shuffled feature order (Fisher-Yates)
        for k in range(d):
            if tried >= max_features:
                break
            swap = k + np.random.randint(0, d - k)
            tmp = perm[k]
            perm[k] = perm[swap]
            perm[swap] = tmp
            col = perm[k]
            lo = x[rows[s], col]
            hi = lo
            for i in range(s + 1, e):
                v = x[rows[i], col]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if not lo < hi:
                continue
            tried += 1
            t = lo + np.random.random() * (hi - lo)
            if not t > lo:
                t = hi
            nl = 0
            nl1 = 0
            for i in range(s, e):
                r = rows[i]
                if x[r, col] < t:
                    nl += 1
                    nl1 += y[r]
            if nl == 0 or nl == m:
                continue
            dec = parent - _gini_weighted(nl, nl1) - _gini_weighted(m - nl, n1 - nl1)
            if dec > best:
                best = dec
                best_f = col
                best_t = t
        if best_f < 0:
            continue
        # in-place partition of rows[s:e]
        a = s
        b = e - 1
        while a <= b:
            if x[rows[a], best_f] < best_t:
                a += 1
            else:
                tmp = rows[a]
                rows[a] = rows[b]
                rows[b] = tmp
                b -= 1
        ln = n_nodes
        rn = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = ln
        right[node] = rn
        gain[node] = best
        st_node[sp] = rn
        st_start[sp] = a
        st_end[sp] = e
        st_depth[sp] = depth + 1
        sp += 1
        st_node[sp] = ln
        st_start[sp] = s
        st_end[sp] = a
        st_depth[sp] = depth + 1
        sp += 1
    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], value[:n_nodes], gain[:n_nodes])
