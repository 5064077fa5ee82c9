"""Minipatch boosting loop with adaptive sampling and out-of-patch stopping.

Each iteration samples a minipatch from the adaptive distributions, fits
a shallow tree, adds its vote to every observation's running margin (and
to an out-of-patch margin for the rows the tree never saw), then refreshes
both sampling distributions. The out-of-patch margin yields a validation
accuracy that drives early stopping; the post-burn-in averages of the
sampling distributions double as the model's intrinsic importance report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adversary import fit_adversary
from .data import Dataset
from .errors import ConfigError
from .sampling import (
    Minipatch,
    SamplerState,
    init_state,
    sample_minipatch,
    update_feature_probs,
    update_observation_probs,
)
from .tree import (
    DecisionTree,
    TreeConfig,
    fair_tree_fis,
    fit_tree,
    predict_batch,
    predict_tree,
    tree_fis,
    tree_from_dict,
    tree_to_dict,
)

__all__ = [
    "TrainConfig",
    "Ensemble",
    "OopTracker",
    "ImportanceReport",
    "TrainResult",
    "train",
    "decision_value",
    "decision_values",
    "predict",
    "predict_rows",
    "oop_accuracy",
    "early_stop_check",
    "model_to_dict",
    "model_from_dict",
    "importance_to_dict",
]


@dataclass(frozen=True)
class TrainConfig:
    alpha: float
    mu: float = 0.2
    n_override: int | None = None
    m_override: int | None = None
    max_iterations: int = 500
    burn_in: int = 20
    patience_window: int = 50
    stop_margin: float = 0.001
    epsilon_floor: float = 1e-4
    tree: TreeConfig = field(default_factory=TreeConfig)
    seed: int = 0
    truncate_at_best: bool = True

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.mu < 1.0:
            raise ConfigError(f"mu must be in (0, 1), got {self.mu}")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if not 0 <= self.burn_in < self.max_iterations:
            raise ConfigError("burn_in must satisfy 0 <= burn_in < max_iterations")
        if self.patience_window < 1:
            raise ConfigError("patience_window must be >= 1")
        if self.stop_margin < 0:
            raise ConfigError("stop_margin must be >= 0")
        if self.epsilon_floor <= 0:
            raise ConfigError("epsilon_floor must be positive")
        for name in ("n_override", "m_override"):
            value = getattr(self, name)
            if value is not None and int(value) < 1:
                raise ConfigError(f"{name} must be >= 1 when set")

    def patch_shape(self, N: int, M: int) -> tuple[int, int]:
        """Minipatch size: ceil(sqrt(.)) of each dimension unless overridden."""
        n = self.n_override if self.n_override is not None else math.isqrt(N - 1) + 1
        m = self.m_override if self.m_override is not None else math.isqrt(M - 1) + 1
        return min(int(n), N), min(int(m), M)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "mu": self.mu,
            "n_override": self.n_override,
            "m_override": self.m_override,
            "max_iterations": self.max_iterations,
            "burn_in": self.burn_in,
            "patience_window": self.patience_window,
            "stop_margin": self.stop_margin,
            "epsilon_floor": self.epsilon_floor,
            "tree": self.tree.to_dict(),
            "seed": self.seed,
            "truncate_at_best": self.truncate_at_best,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        if not isinstance(doc, dict):
            raise ConfigError("train config must be a JSON object")
        doc = dict(doc)
        if "alpha" not in doc:
            raise ConfigError("train config requires an alpha value")
        tree_doc = doc.pop("tree", None)
        known = {
            "alpha", "mu", "n_override", "m_override", "max_iterations", "burn_in",
            "patience_window", "stop_margin", "epsilon_floor", "seed", "truncate_at_best",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown train config fields: {sorted(unknown)}")
        try:
            tree = TreeConfig(**tree_doc) if tree_doc else TreeConfig()
        except TypeError as exc:
            raise ConfigError(f"bad tree config: {exc}") from exc
        return cls(tree=tree, **doc)


@dataclass(frozen=True)
class Ensemble:
    """Ordered weak learners; the decision value is their vote sum."""

    trees: tuple[DecisionTree, ...]

    @property
    def iteration_count(self) -> int:
        return len(self.trees)


@dataclass
class OopTracker:
    """Cumulative out-of-patch margins and the validation trace built on them."""

    g_margins: np.ndarray
    oop_trace: list[float] = field(default_factory=list)
    best_oop: float = -math.inf
    best_iteration: int = 0

    def observe(self, t: int, oop: float) -> None:
        self.oop_trace.append(oop)
        if oop > self.best_oop:
            self.best_oop = oop
            self.best_iteration = t


@dataclass(frozen=True)
class ImportanceReport:
    """Post-burn-in averages of the sampling distributions, plus the
    ensemble-level importance scores scattered back to global features."""

    feature_probabilities: np.ndarray
    observation_probabilities: np.ndarray
    ensemble_tree_fis: np.ndarray
    ensemble_fair_fis: np.ndarray


@dataclass
class TrainResult:
    ensemble: Ensemble
    oop: OopTracker
    importance: ImportanceReport
    sampler: SamplerState
    warnings: list[str]
    patch_trace: list[Minipatch]
    prob_trace: list[tuple[int, np.ndarray, np.ndarray]]
    train_margins: np.ndarray


def _sign_pm(values: np.ndarray) -> np.ndarray:
    """Sign with sign(0) = +1, onto {-1, +1}."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int8)


def oop_accuracy(tracker: OopTracker, patch: Minipatch, y: np.ndarray) -> float:
    """Fraction of out-of-patch rows whose margin sign matches the label.

    When the patch covers every row the value is undefined; the previous
    trace value is returned (0.0 at the first iteration).
    """
    mask = np.ones(tracker.g_margins.shape[0], dtype=bool)
    mask[patch.rows] = False
    if not mask.any():
        return tracker.oop_trace[-1] if tracker.oop_trace else 0.0
    agree = _sign_pm(tracker.g_margins[mask]) == np.asarray(y)[mask]
    return float(agree.mean())


def early_stop_check(tracker: OopTracker, t: int, config: TrainConfig) -> bool:
    """True when training should stop after iteration t.

    Fires once the best value inside the trailing patience window no
    longer beats the best value seen before that window by stop_margin:
    sub-margin progress does not reset the patience clock.
    """
    if t <= config.burn_in + config.patience_window:
        return False
    trace = tracker.oop_trace
    window_start = t - config.patience_window
    window_best = max(trace[window_start:t])
    prior_best = max(trace[:window_start])
    return window_best < prior_best + config.stop_margin


def train(data: Dataset, config: TrainConfig,
          record_probability_trace: bool = False) -> TrainResult:
    """Run the full boosting loop on a dataset.

    Returns the (optionally best-iteration-truncated) ensemble, the
    out-of-patch tracker, the intrinsic importance report, the final
    sampler state, and any degeneracy warnings. Deterministic given
    (data, config).
    """
    X, y, z = data.features, data.labels, data.protected
    N, M = data.n_samples, data.n_features
    n, m = config.patch_shape(N, M)
    run_warnings: list[str] = []
    if np.unique(y).shape[0] < 2:
        run_warnings.append("labels are single-class; accuracy terms are degenerate")
    if np.unique(z).shape[0] < 2:
        run_warnings.append("protected attribute is constant; fairness terms are inert")

    state = init_state(N, M, alpha=config.alpha, mu=config.mu,
                       epsilon_floor=config.epsilon_floor, seed=config.seed)
    margins = np.zeros(N)
    tracker = OopTracker(g_margins=np.zeros(N))
    y_float = y.astype(np.float64)

    trees: list[DecisionTree] = []
    patch_trace: list[Minipatch] = []
    prob_trace: list[tuple[int, np.ndarray, np.ndarray]] = []
    per_tree_scores: list[tuple[np.ndarray, np.ndarray]] = []
    p_sum = np.zeros(N)
    q_sum = np.zeros(M)
    averaged = 0
    oop_warned = False

    for t in range(1, config.max_iterations + 1):
        patch = sample_minipatch(state, n, m)
        rows, cols = patch.rows, patch.cols
        X_patch = X[np.ix_(rows, cols)]
        y_patch = y[rows]
        z_patch = z[rows]

        tree = fit_tree(X_patch, y_patch, config.tree, feature_subset=cols)
        votes = predict_batch(tree, X).astype(np.float64)
        margins += votes
        out_mask = np.ones(N, dtype=bool)
        out_mask[rows] = False
        tracker.g_margins[out_mask] += votes[out_mask]

        h_patch = votes[rows].astype(np.int8)
        adversary = fit_adversary(h_patch, z_patch)
        update_observation_probs(state, margins, patch, adversary, h_patch,
                                 y_float, z, t)
        acc_scores = tree_fis(tree, X_patch, y_patch)
        # Fairness importance is evaluated on every row (restricted to the
        # tree's columns), not the minipatch: at alpha > 0 the patch is
        # importance-sampled toward rows whose group the adversary cannot
        # infer, which systematically understates the bias of the tree's
        # splits when measured in-patch.
        fair_scores = fair_tree_fis(tree, X[:, cols], y, z)
        update_feature_probs(state, patch, acc_scores, fair_scores)
        per_tree_scores.append((acc_scores, fair_scores))

        if not out_mask.any() and not oop_warned:
            run_warnings.append("minipatch covers all rows; out-of-patch accuracy undefined")
            oop_warned = True
        tracker.observe(t, oop_accuracy(tracker, patch, y))

        trees.append(tree)
        patch_trace.append(patch)
        if record_probability_trace:
            prob_trace.append((t, state.p.copy(), state.q.copy()))
        if t > config.burn_in:
            p_sum += state.p
            q_sum += state.q
            averaged += 1
        if early_stop_check(tracker, t, config):
            break

    n_kept = tracker.best_iteration if config.truncate_at_best else len(trees)
    ensemble = Ensemble(trees=tuple(trees[:n_kept]))
    importance = _build_importance(ensemble, per_tree_scores[:n_kept], M,
                                   p_sum / averaged, q_sum / averaged)
    return TrainResult(
        ensemble=ensemble,
        oop=tracker,
        importance=importance,
        sampler=state,
        warnings=run_warnings,
        patch_trace=patch_trace,
        prob_trace=prob_trace,
        train_margins=margins,
    )


def _build_importance(ensemble: Ensemble, per_tree_scores, M: int,
                      p_avg: np.ndarray, q_avg: np.ndarray) -> ImportanceReport:
    """Scatter each kept tree's patch-local scores to global feature
    indices and average over trees."""
    acc_total = np.zeros(M)
    fair_total = np.zeros(M)
    for tree, (acc, fair) in zip(ensemble.trees, per_tree_scores):
        acc_total[tree.feature_subset] += acc
        fair_total[tree.feature_subset] += fair
    count = max(len(ensemble.trees), 1)
    return ImportanceReport(
        feature_probabilities=q_avg,
        observation_probabilities=p_avg,
        ensemble_tree_fis=acc_total / count,
        ensemble_fair_fis=fair_total / count,
    )


def decision_value(ensemble: Ensemble, x) -> float:
    """Vote sum of all trees for one full-width row."""
    return float(sum(predict_tree(tree, x) for tree in ensemble.trees))


def decision_values(ensemble: Ensemble, X: np.ndarray) -> np.ndarray:
    """Vote sums for every row of a matrix."""
    X = np.asarray(X, dtype=np.float64)
    total = np.zeros(X.shape[0])
    for tree in ensemble.trees:
        total += predict_batch(tree, X)
    return total


def predict(ensemble: Ensemble, x) -> int:
    """Sign of the decision value; ties predict +1."""
    return 1 if decision_value(ensemble, x) >= 0 else -1


def predict_rows(ensemble: Ensemble, X: np.ndarray) -> np.ndarray:
    return _sign_pm(decision_values(ensemble, X))


def model_to_dict(ensemble: Ensemble, config: TrainConfig,
                  feature_names, extra: dict | None = None) -> dict:
    doc = {
        "schema_version": 1,
        "kind": "fairpatch-model",
        "config": config.to_dict(),
        "feature_names": list(feature_names),
        "trees": [tree_to_dict(tree) for tree in ensemble.trees],
    }
    if extra:
        doc.update(extra)
    return doc


def model_from_dict(doc: dict) -> tuple[Ensemble, TrainConfig, list[str]]:
    if doc.get("kind") != "fairpatch-model":
        raise ConfigError("not a fairpatch model document")
    ensemble = Ensemble(trees=tuple(tree_from_dict(d) for d in doc["trees"]))
    config = TrainConfig.from_dict(doc["config"])
    return ensemble, config, list(doc["feature_names"])


def importance_to_dict(report: ImportanceReport, feature_names,
                       burn_in: int, iterations: int) -> dict:
    return {
        "schema_version": 1,
        "kind": "fairpatch-importance",
        "burn_in": burn_in,
        "iterations": iterations,
        "feature_names": list(feature_names),
        "feature_probabilities": [float(v) for v in report.feature_probabilities],
        "observation_probabilities": [float(v) for v in report.observation_probabilities],
        "ensemble_tree_fis": [float(v) for v in report.ensemble_tree_fis],
        "ensemble_fair_fis": [float(v) for v in report.ensemble_fair_fis],
    }
