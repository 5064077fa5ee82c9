"""Adaptive observation and feature sampling distributions.

Maintains the two probability vectors that drive minipatch selection:
p over observations (blending an exponential accuracy loss with an
adversarial fairness loss) and q over features (exponentially smoothed
toward per-tree importance shares, with an exploration floor).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .adversary import AdversaryModel
from .errors import ConfigError, SamplingError

__all__ = [
    "SamplerState",
    "Minipatch",
    "init_state",
    "sample_minipatch",
    "update_observation_probs",
    "update_feature_probs",
    "write_prob_trace",
]

EXP_CLAMP = 30.0


@dataclass(frozen=True)
class Minipatch:
    """Row and column index sets naming one sampled sub-table."""

    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if np.unique(rows).shape != rows.shape or np.unique(cols).shape != cols.shape:
            raise ValueError("minipatch indices must be distinct")
        rows.flags.writeable = False
        cols.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)


@dataclass
class SamplerState:
    """Mutable sampling state; single writer (the training loop)."""

    p: np.ndarray
    q: np.ndarray
    loss_acc: np.ndarray
    loss_fair: np.ndarray
    alpha: float
    mu: float
    epsilon_floor: float
    rng: np.random.Generator

    @property
    def n_observations(self) -> int:
        return self.p.shape[0]

    @property
    def n_features(self) -> int:
        return self.q.shape[0]


def init_state(N: int, M: int, alpha: float, mu: float = 0.2,
               epsilon_floor: float = 1e-4, seed=0) -> SamplerState:
    """Uniform distributions and unit loss caches."""
    if N < 1 or M < 1:
        raise ConfigError(f"need N, M >= 1, got {N}, {M}")
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")
    if not 0.0 < mu < 1.0:
        raise ConfigError(f"mu must be in (0, 1), got {mu}")
    if not epsilon_floor > 0.0:
        raise ConfigError(f"epsilon_floor must be positive, got {epsilon_floor}")
    return SamplerState(
        p=np.full(N, 1.0 / N),
        q=np.full(M, 1.0 / M),
        loss_acc=np.ones(N),
        loss_fair=np.ones(N),
        alpha=float(alpha),
        mu=float(mu),
        epsilon_floor=float(epsilon_floor),
        rng=np.random.default_rng(seed),
    )


def _weighted_draw(rng: np.random.Generator, weights: np.ndarray, k: int) -> np.ndarray:
    """Weighted sampling without replacement via exponential keys.

    Each index gets key u^(1/w); the k largest keys win, which selects
    index i first with probability w_i / sum(w). Zero-weight entries
    never win.
    """
    size = weights.shape[0]
    if k > size:
        raise SamplingError(f"cannot draw {k} from {size} items")
    positive = weights > 0
    if int(positive.sum()) < k:
        raise SamplingError(f"only {int(positive.sum())} positive weights for a draw of {k}")
    u = rng.random(size)
    with np.errstate(divide="ignore"):
        keys = np.where(positive, u ** (1.0 / weights), -1.0)
    order = np.argsort(-keys, kind="stable")
    return np.sort(order[:k])


def sample_minipatch(state: SamplerState, n: int, m: int) -> Minipatch:
    """Draw n observation and m feature indices from the current p and q."""
    rows = _weighted_draw(state.rng, state.p, n)
    cols = _weighted_draw(state.rng, state.q, m)
    return Minipatch(rows=rows, cols=cols)


def update_observation_probs(state: SamplerState, ensemble_margins: np.ndarray,
                             patch: Minipatch, adversary: AdversaryModel,
                             h_outputs_on_patch: np.ndarray, y: np.ndarray,
                             z: np.ndarray, t: int) -> SamplerState:
    """Recompute p from the accuracy and fairness losses.

    The accuracy loss exp(-y * E / t) is refreshed for every observation
    (margins are normalized by the iteration count and the exponent is
    clamped, so the exponential cannot overflow).

    The fairness loss exp(-2 * (2z - 1) * (s - pi)) is refreshed only for
    the patch rows, where the adversary saw this iteration's tree outputs;
    other rows keep their cached value. s is the adversary's probability
    of z=1 and pi the smoothed patch base rate: centering on pi makes the
    loss neutral (= 1) whenever the tree's output carries no information
    about the group beyond its prevalence, and the negative sign shifts
    sampling mass toward rows whose group the adversary cannot infer,
    concentrating the learner on regions where its output does not leak
    the protected attribute.
    """
    if t < 1:
        raise ValueError(f"iteration must be >= 1, got {t}")
    y = np.asarray(y, dtype=np.float64)
    margins = np.asarray(ensemble_margins, dtype=np.float64)
    exponent = np.clip(-(y * margins) / t, -EXP_CLAMP, EXP_CLAMP)
    state.loss_acc = np.exp(exponent)

    s = adversary.score_vector(h_outputs_on_patch)
    z_patch = np.asarray(z, dtype=np.float64)[patch.rows]
    base_rate = (z_patch.sum() + 1.0) / (z_patch.shape[0] + 2.0)
    state.loss_fair[patch.rows] = np.exp(-2.0 * (2.0 * z_patch - 1.0) * (s - base_rate))

    blended = (1.0 - state.alpha) * state.loss_acc + state.alpha * state.loss_fair
    state.p = blended / blended.sum()
    return state


def update_feature_probs(state: SamplerState, patch: Minipatch,
                         tree_fis: np.ndarray, fair_fis: np.ndarray) -> SamplerState:
    """Blend q toward the patch's importance shares and re-floor.

    Accuracy importances are normalized over the patch (uniform when the
    patch tree made no split); fairness importances pass through a ReLU
    before normalizing, so bias-contributing features contribute nothing
    (an all-nonpositive vector contributes an all-zero share). The floor
    is applied to the normalized vector and the result renormalized,
    which guarantees min(q) >= eps / (1 + M*eps).
    """
    cols = patch.cols
    m = cols.shape[0]
    acc = np.asarray(tree_fis, dtype=np.float64)
    fair = np.asarray(fair_fis, dtype=np.float64)
    if acc.shape != (m,) or fair.shape != (m,):
        raise ValueError("importance vectors must be parallel to patch.cols")

    acc_sum = acc.sum()
    acc_share = acc / acc_sum if acc_sum > 0 else np.full(m, 1.0 / m)
    gated = np.maximum(fair, 0.0)
    gated_sum = gated.sum()
    fair_share = gated / gated_sum if gated_sum > 0 else np.zeros(m)

    blended = state.q.copy()
    blended[cols] = (1.0 - state.mu) * state.q[cols] + state.mu * (
        state.alpha * fair_share + (1.0 - state.alpha) * acc_share)

    normalized = blended / blended.sum()
    floored = np.maximum(normalized, state.epsilon_floor)
    state.q = floored / floored.sum()
    return state


def write_prob_trace(path, snapshots) -> None:
    """Stream (iteration, kind, index, probability) rows to a CSV.

    snapshots is an iterable of (iteration, p_vector, q_vector).
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "kind", "index", "probability"])
        for t, p, q in snapshots:
            for i, value in enumerate(p):
                writer.writerow([t, "p", i, repr(float(value))])
            for j, value in enumerate(q):
                writer.writerow([t, "q", j, repr(float(value))])
