"""Per-iteration adversary predicting the protected attribute.

The weak learner's output is a single bit, so the strongest possible
adversary is the smoothed conditional frequency table P(z=1 | h(x)=v);
no richer model can extract more from a binary input. Add-one smoothing
keeps both probabilities strictly inside (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AdversaryModel", "fit_adversary", "adversary_score"]


@dataclass(frozen=True)
class AdversaryModel:
    score_pos: float  # P(z=1 | h = +1), smoothed
    score_neg: float  # P(z=1 | h = -1), smoothed

    def score_vector(self, h_outputs) -> np.ndarray:
        h = np.asarray(h_outputs)
        return np.where(h == 1, self.score_pos, self.score_neg)


def fit_adversary(h_outputs, z_patch) -> AdversaryModel:
    """Fit the 2-cell frequency table with add-one smoothing.

    score(v) = (count(z=1 and h=v) + 1) / (count(h=v) + 2); an output
    value absent from the patch gets the 1/2 prior.
    """
    h = np.asarray(h_outputs)
    z = np.asarray(z_patch)
    if h.shape != z.shape or h.ndim != 1 or h.shape[0] < 1:
        raise ValueError("h_outputs and z_patch must be equal-length nonempty vectors")
    scores = []
    for v in (1, -1):
        mask = h == v
        scores.append((float((z[mask] == 1).sum()) + 1.0) / (float(mask.sum()) + 2.0))
    return AdversaryModel(score_pos=scores[0], score_neg=scores[1])


def adversary_score(model: AdversaryModel, h_output: int) -> float:
    """Smoothed probability of z=1 given one weak-learner output."""
    return model.score_pos if h_output == 1 else model.score_neg
