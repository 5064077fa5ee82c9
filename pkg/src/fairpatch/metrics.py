"""Demographic-parity metrics and the accuracy/fairness sweep harness.

fairness_score is 1 - dp_gap: 1 means perfect parity of positive-
prediction rates across the two protected groups. dp_ratio (min rate
over max rate) is reported alongside since part of the fairness
literature prefers it.
"""

from __future__ import annotations

import csv
import io
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boosting import Ensemble, TrainConfig, predict_rows, train
from .data import Dataset, train_test_split
from .errors import ConfigError
from .util import derive_seed

__all__ = [
    "GroupRates",
    "EvaluationReport",
    "group_rates",
    "dp_gap_from_rates",
    "evaluate",
    "evaluate_predictions",
    "alpha_sweep",
    "summarize_sweep",
    "sweep_records_to_csv",
    "sweep_long_format_csv",
]


@dataclass(frozen=True)
class GroupRates:
    """Positive-prediction rate per protected group; None when the group
    is absent."""

    positive_rate_z1: float | None
    positive_rate_z0: float | None
    count_z1: int
    count_z0: int


@dataclass(frozen=True)
class EvaluationReport:
    accuracy: float
    dp_gap: float
    dp_ratio: float
    fairness_score: float
    n_test: int

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "fairpatch-evaluation",
            "accuracy": self.accuracy,
            "dp_gap": self.dp_gap,
            "dp_ratio": self.dp_ratio,
            "fairness_score": self.fairness_score,
            "n_test": self.n_test,
        }


def group_rates(predictions, z) -> GroupRates:
    """Empirical positive rates P(yhat=+1 | z=v) for v in {1, 0}."""
    yhat = np.asarray(predictions)
    z = np.asarray(z)
    if yhat.shape != z.shape or yhat.ndim != 1 or yhat.shape[0] < 1:
        raise ValueError("predictions and z must be equal-length nonempty vectors")
    rates: list[float | None] = []
    counts: list[int] = []
    for v in (1, 0):
        mask = z == v
        counts.append(int(mask.sum()))
        if counts[-1] == 0:
            warnings.warn(f"protected group z={v} is empty; its rate is undefined")
            rates.append(None)
        else:
            rates.append(float((yhat[mask] == 1).mean()))
    return GroupRates(positive_rate_z1=rates[0], positive_rate_z0=rates[1],
                      count_z1=counts[0], count_z0=counts[1])


def dp_gap_from_rates(rates: GroupRates) -> tuple[float, float]:
    """(dp_gap, dp_ratio); a missing group yields the fair-by-default
    values (0, 1)."""
    r1, r0 = rates.positive_rate_z1, rates.positive_rate_z0
    if r1 is None or r0 is None:
        return 0.0, 1.0
    gap = abs(r1 - r0)
    hi = max(r1, r0)
    ratio = min(r1, r0) / hi if hi > 0 else 1.0
    return gap, ratio


def evaluate_predictions(predictions, y, z) -> EvaluationReport:
    yhat = np.asarray(predictions)
    y = np.asarray(y)
    accuracy = float((yhat == y).mean())
    gap, ratio = dp_gap_from_rates(group_rates(yhat, np.asarray(z)))
    return EvaluationReport(accuracy=accuracy, dp_gap=gap, dp_ratio=ratio,
                            fairness_score=1.0 - gap, n_test=int(y.shape[0]))


def evaluate(ensemble: Ensemble, test: Dataset) -> EvaluationReport:
    """Accuracy and demographic-parity report of an ensemble on a dataset."""
    yhat = predict_rows(ensemble, test.features)
    return evaluate_predictions(yhat, test.labels, test.protected)


def _run_cell(args) -> dict:
    data, base_doc, alpha, split_index, split_seed, train_seed, test_fraction = args
    train_data, test_data = train_test_split(data, test_fraction, split_seed)
    config = TrainConfig.from_dict({**base_doc, "alpha": alpha, "seed": train_seed})
    result = train(train_data, config)
    report = evaluate(result.ensemble, test_data)
    return {
        "alpha": alpha,
        "split": split_index,
        "accuracy": report.accuracy,
        "fairness_score": report.fairness_score,
        "dp_gap": report.dp_gap,
        "dp_ratio": report.dp_ratio,
    }


def alpha_sweep(data: Dataset, grid, base_config: TrainConfig, splits: int,
                test_fraction: float = 0.2, workers: int = 1) -> list[dict]:
    """Train and evaluate every (alpha, split) cell.

    Splits are seeded by split index only, so every alpha sees the same
    partitions; cells are independent and may run in parallel.
    """
    grid = [float(a) for a in grid]
    if not grid:
        raise ConfigError("alpha grid must be nonempty")
    if any(not 0.0 <= a <= 1.0 for a in grid):
        raise ConfigError(f"alpha grid values must lie in [0, 1]: {grid}")
    if splits < 1:
        raise ConfigError("splits must be >= 1")

    base_doc = base_config.to_dict()
    tasks = []
    for s in range(splits):
        split_seed = derive_seed(base_config.seed, 1, s)
        train_seed = derive_seed(base_config.seed, 2, s)
        for alpha in grid:
            tasks.append((data, base_doc, alpha, s, split_seed, train_seed, test_fraction))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, tasks))
    else:
        records = [_run_cell(task) for task in tasks]
    records.sort(key=lambda r: (r["alpha"], r["split"]))
    return records


def summarize_sweep(records: list[dict]) -> list[dict]:
    """Per-alpha mean and sample standard deviation of the two scores."""
    out = []
    for alpha in sorted({r["alpha"] for r in records}):
        acc = np.array([r["accuracy"] for r in records if r["alpha"] == alpha])
        fair = np.array([r["fairness_score"] for r in records if r["alpha"] == alpha])
        ddof = 1 if acc.shape[0] > 1 else 0
        out.append({
            "alpha": alpha,
            "mean_accuracy": float(acc.mean()),
            "sd_accuracy": float(acc.std(ddof=ddof)),
            "mean_fairness": float(fair.mean()),
            "sd_fairness": float(fair.std(ddof=ddof)),
        })
    return out


def sweep_records_to_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "split", "accuracy", "fairness_score", "dp_gap", "dp_ratio"])
    for r in records:
        writer.writerow([r["alpha"], r["split"], repr(r["accuracy"]),
                         repr(r["fairness_score"]), repr(r["dp_gap"]), repr(r["dp_ratio"])])
    return buf.getvalue()


def sweep_long_format_csv(records: list[dict]) -> str:
    """Tidy (alpha, metric, value) rows for external plotting tools."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "split", "metric", "value"])
    for r in records:
        for metric in ("accuracy", "fairness_score", "dp_gap", "dp_ratio"):
            writer.writerow([r["alpha"], r["split"], metric, repr(r[metric])])
    return buf.getvalue()


def default_workers() -> int:
    """Worker count bounded by the FAIRPATCH_THREADS environment variable."""
    raw = os.environ.get("FAIRPATCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
