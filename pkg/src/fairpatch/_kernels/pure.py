"""Pure numpy tree kernels (fallback lane).

Mirrors the compiled lane operation-for-operation: the split gain is
evaluated with the same sequence of IEEE-754 binary operations in both,
so a tree grown under either lane is bit-identical.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "pure"


def best_split(values: np.ndarray, ypos: np.ndarray, min_samples_leaf: int, node_weight: float):
    """Best (feature, threshold) for one node by weighted Gini decrease.

    values: (n, m) float64 feature matrix of the samples at the node.
    ypos:   (n,) uint8, 1 where the label is +1.
    node_weight: node mass divided by the tree's training-sample count.

    Returns (gain, feature, threshold); feature is -1 when no candidate
    split satisfies min_samples_leaf (or all feature values are tied).
    Ties are broken toward the lower feature index, then lower threshold.
    """
    n, m = values.shape
    total_pos = float(ypos.sum())
    nt = float(n)
    pt1 = total_pos / nt
    pt0 = (nt - total_pos) / nt
    g_node = 1.0 - pt1 * pt1 - pt0 * pt0

    best_gain = -1.0
    best_feature = -1
    best_threshold = 0.0
    if n < 2 * min_samples_leaf:
        return best_gain, best_feature, best_threshold

    positions = np.arange(1, n, dtype=np.float64)
    for j in range(m):
        col = values[:, j]
        order = np.argsort(col, kind="stable")
        v = col[order]
        pos_prefix = np.cumsum(ypos[order], dtype=np.float64)[:-1]

        valid = v[:-1] != v[1:]
        if min_samples_leaf > 1:
            k = np.arange(1, n)
            valid = valid & (k >= min_samples_leaf) & (n - k >= min_samples_leaf)
        if not valid.any():
            continue

        nl = positions
        nr = nt - nl
        pos_l = pos_prefix
        pos_r = total_pos - pos_l
        pl1 = pos_l / nl
        pl0 = (nl - pos_l) / nl
        pr1 = pos_r / nr
        pr0 = (nr - pos_r) / nr
        g_left = 1.0 - pl1 * pl1 - pl0 * pl0
        g_right = 1.0 - pr1 * pr1 - pr0 * pr0
        child = (nl / nt) * g_left + (nr / nt) * g_right
        gain = node_weight * (g_node - child)
        gain = np.where(valid, gain, -np.inf)

        k_best = int(np.argmax(gain))
        if gain[k_best] > best_gain:
            best_gain = float(gain[k_best])
            best_feature = j
            threshold = (v[k_best] + v[k_best + 1]) / 2.0
            if threshold == v[k_best + 1]:
                # Midpoint of adjacent doubles can round up; keep the
                # left/right partition consistent with the gain counts.
                threshold = v[k_best]
            best_threshold = threshold
    return best_gain, best_feature, best_threshold


def route_rows(feature: np.ndarray, threshold: np.ndarray, left: np.ndarray,
               right: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Route rows of X (already restricted to the tree's columns) to leaves.

    Returns the leaf node index reached by each row. Left children take
    x[feature] <= threshold.
    """
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = np.nonzero(feature[node] >= 0)[0]
    while active.size:
        cur = node[active]
        f = feature[cur]
        go_left = X[active, f] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[feature[node[active]] >= 0]
    return node
