"""Shallow CART weak learners and their per-feature importance scores.

Trees are grown greedily by weighted Gini decrease on a minipatch and
score two per-feature quantities afterwards: an accuracy importance
(classic mean-decrease-in-impurity) and a signed fairness importance
(how much each feature's splits moved the tree's demographic-parity gap
on its training patch; positive means the splits narrowed the gap).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError

__all__ = [
    "TreeConfig",
    "DecisionTree",
    "fit_tree",
    "predict_tree",
    "predict_batch",
    "tree_fis",
    "fair_tree_fis",
    "tree_to_dict",
    "tree_from_dict",
]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 4
    min_samples_leaf: int = 1
    impurity: str = "gini"

    def __post_init__(self):
        if int(self.max_depth) < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if int(self.min_samples_leaf) < 1:
            raise ConfigError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.impurity != "gini":
            raise ConfigError(f"unsupported impurity {self.impurity!r}")

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "impurity": self.impurity,
        }


@dataclass(frozen=True)
class DecisionTree:
    """Axis-aligned binary tree stored as parallel node arrays.

    Nodes are in depth-first preorder; node 0 is the root. `feature`
    holds local column indices into `feature_subset` (-1 marks a leaf),
    and rows with x[feature] <= threshold go left. `prediction` is the
    majority training label of every node, leaf or not (ties fall to +1).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prediction: np.ndarray
    feature_subset: np.ndarray
    depth: int

    def __post_init__(self):
        for name, arr in (("feature", self.feature), ("threshold", self.threshold),
                          ("left", self.left), ("right", self.right),
                          ("prediction", self.prediction), ("feature_subset", self.feature_subset)):
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_local_features(self) -> int:
        return self.feature_subset.shape[0]

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0


def _majority(pos: int, count: int) -> int:
    return 1 if 2 * pos >= count else -1


def fit_tree(X_patch: np.ndarray, y_patch: np.ndarray, config: TreeConfig,
             feature_subset=None) -> DecisionTree:
    """Grow a CART classifier on one minipatch.

    Splits maximize the weighted Gini decrease over midpoints between
    consecutive distinct sorted values; gain ties break toward the lower
    feature index, then the lower threshold. Growth stops at max_depth,
    at a pure node, or when min_samples_leaf cannot be respected. A pure
    input yields a single-leaf tree.
    """
    X = np.ascontiguousarray(X_patch, dtype=np.float64)
    y = np.asarray(y_patch)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X_patch must be n x m with matching label length")
    n, m = X.shape
    if m < 1:
        raise ValueError("need at least one feature")
    if n < 2 * config.min_samples_leaf:
        raise ValueError(f"need n >= 2*min_samples_leaf ({2 * config.min_samples_leaf}), got {n}")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be in {-1, +1}")
    if feature_subset is None:
        feature_subset = np.arange(m, dtype=np.int64)
    else:
        feature_subset = np.asarray(feature_subset, dtype=np.int64)
        if feature_subset.shape != (m,):
            raise ValueError("feature_subset length must match patch width")

    ypos = (y == 1).astype(np.uint8)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    prediction: list[int] = []
    msl = config.min_samples_leaf
    max_reached = 0

    def grow(idx: np.ndarray, depth: int) -> int:
        nonlocal max_reached
        node = len(feature)
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        count = idx.shape[0]
        pos = int(ypos[idx].sum())
        prediction.append(_majority(pos, count))
        max_reached = max(max_reached, depth)

        if depth >= config.max_depth or pos == 0 or pos == count or count < 2 * msl:
            return node
        gain, j, thr = _kernels.best_split(
            np.ascontiguousarray(X[idx]), ypos[idx], msl, count / n)
        if j < 0:
            return node
        go_left = X[idx, j] <= thr
        feature[node] = int(j)
        threshold[node] = float(thr)
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return DecisionTree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        prediction=np.array(prediction, dtype=np.int8),
        feature_subset=feature_subset,
        depth=max_reached,
    )


def predict_tree(tree: DecisionTree, x) -> int:
    """Route one full-width row through the tree; returns -1 or +1."""
    x = np.asarray(x, dtype=np.float64)
    needed = int(tree.feature_subset.max()) + 1
    if x.shape[0] < needed:
        raise ValueError(f"row has {x.shape[0]} entries, tree references index {needed - 1}")
    node = 0
    while tree.feature[node] >= 0:
        j = tree.feature_subset[tree.feature[node]]
        node = tree.left[node] if x[j] <= tree.threshold[node] else tree.right[node]
    return int(tree.prediction[node])


def predict_batch(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    """Predictions for every row of a full-width matrix."""
    Xsub = np.ascontiguousarray(X[:, tree.feature_subset], dtype=np.float64)
    leaves = _kernels.route_rows(tree.feature, tree.threshold, tree.left, tree.right, Xsub)
    return tree.prediction[leaves]


def _gini_from_counts(pos: float, count: float) -> float:
    p1 = pos / count
    p0 = (count - pos) / count
    return 1.0 - p1 * p1 - p0 * p0


def tree_fis(tree: DecisionTree, X_patch: np.ndarray, y_patch: np.ndarray) -> np.ndarray:
    """Accuracy importance: per-feature sum of weighted Gini decreases.

    Computed over the tree's own training minipatch; entries are indexed
    parallel to feature_subset, and features never split on score 0.
    """
    X = np.asarray(X_patch, dtype=np.float64)
    ypos = (np.asarray(y_patch) == 1).astype(np.int64)
    n = X.shape[0]
    scores = np.zeros(tree.n_local_features)

    def walk(node: int, idx: np.ndarray) -> None:
        if tree.feature[node] < 0 or idx.shape[0] == 0:
            return
        j = int(tree.feature[node])
        go_left = X[idx, j] <= tree.threshold[node]
        idx_l, idx_r = idx[go_left], idx[~go_left]
        nt, nl, nr = idx.shape[0], idx_l.shape[0], idx_r.shape[0]
        if nl and nr:
            g = _gini_from_counts(ypos[idx].sum(), nt)
            gl = _gini_from_counts(ypos[idx_l].sum(), nl)
            gr = _gini_from_counts(ypos[idx_r].sum(), nr)
            scores[j] += (nt / n) * (g - (nl / nt) * gl - (nr / nt) * gr)
        walk(int(tree.left[node]), idx_l)
        walk(int(tree.right[node]), idx_r)

    walk(0, np.arange(n))
    return scores


def _routed_gap(tree: DecisionTree, X: np.ndarray, z: np.ndarray,
                n1_total: int, n0_total: int, blocked: int) -> float:
    """Demographic-parity gap of the tree's patch predictions when every
    node splitting on `blocked` acts as a leaf (-1 blocks nothing)."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = np.nonzero((tree.feature[node] >= 0) & (tree.feature[node] != blocked))[0]
    while active.size:
        cur = node[active]
        f = tree.feature[cur]
        go_left = X[active, f] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])
        nxt = tree.feature[node[active]]
        active = active[(nxt >= 0) & (nxt != blocked)]
    positive = tree.prediction[node] == 1
    rate1 = (positive & (z == 1)).sum() / n1_total
    rate0 = (positive & (z == 0)).sum() / n0_total
    return abs(rate1 - rate0)


def fair_tree_fis(tree: DecisionTree, X_patch: np.ndarray, y_patch: np.ndarray,
                  z_patch: np.ndarray) -> np.ndarray:
    """Signed fairness importance of each feature on the training patch.

    Feature-knockout counterfactual: F_j is the patch demographic-parity
    gap of the tree with every node splitting on j truncated to a
    majority-label leaf, minus the gap of the intact tree. Positive
    scores mean feature j's splits narrowed the gap, negative that they
    widened it; features never split on score 0. A patch containing a
    single protected group has no contrast and scores all zeros.
    """
    X = np.asarray(X_patch, dtype=np.float64)
    z = np.asarray(z_patch)
    n = X.shape[0]
    scores = np.zeros(tree.n_local_features)
    n1_total = int((z == 1).sum())
    n0_total = n - n1_total
    if n1_total == 0 or n0_total == 0:
        return scores
    used = np.unique(tree.feature[tree.feature >= 0])
    if used.size == 0:
        return scores
    full_gap = _routed_gap(tree, X, z, n1_total, n0_total, blocked=-1)
    for j in used:
        scores[int(j)] = _routed_gap(tree, X, z, n1_total, n0_total, blocked=int(j)) - full_gap
    return scores


def tree_to_dict(tree: DecisionTree) -> dict:
    nodes = []
    for i in range(tree.n_nodes):
        node = {"prediction": int(tree.prediction[i])}
        if tree.feature[i] >= 0:
            node.update(
                feature=int(tree.feature[i]),
                threshold=float(tree.threshold[i]),
                left=int(tree.left[i]),
                right=int(tree.right[i]),
            )
        nodes.append(node)
    return {
        "feature_subset": [int(j) for j in tree.feature_subset],
        "depth": int(tree.depth),
        "nodes": nodes,
    }


def tree_from_dict(doc: dict) -> DecisionTree:
    nodes = doc["nodes"]
    k = len(nodes)
    feature = np.full(k, -1, dtype=np.int32)
    threshold = np.full(k, np.nan)
    left = np.full(k, -1, dtype=np.int32)
    right = np.full(k, -1, dtype=np.int32)
    prediction = np.zeros(k, dtype=np.int8)
    for i, node in enumerate(nodes):
        prediction[i] = node["prediction"]
        if "feature" in node:
            feature[i] = node["feature"]
            threshold[i] = node["threshold"]
            left[i] = node["left"]
            right[i] = node["right"]
    return DecisionTree(
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        prediction=prediction,
        feature_subset=np.asarray(doc["feature_subset"], dtype=np.int64),
        depth=int(doc["depth"]),
    )
