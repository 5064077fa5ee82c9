"""Tabular datasets with a binary label and a binary protected attribute.

Holds the immutable design matrix used by the boosting engine, plus the
three ways of producing one: the synthetic generator used in the
simulation studies, generic CSV ingestion, and stratified splitting.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, fields

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError, SchemaError

__all__ = [
    "Dataset",
    "SimulationConfig",
    "IngestConfig",
    "simulate",
    "load_csv",
    "train_test_split",
    "write_dataset_csv",
]


@dataclass(frozen=True)
class Dataset:
    """Immutable (features, labels, protected) triple.

    labels take values in {-1, +1}; protected takes values in {0, 1}.
    Arrays are defensively marked read-only so instances can be shared
    across threads.
    """

    features: np.ndarray
    labels: np.ndarray
    protected: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int8)
        z = np.asarray(self.protected, dtype=np.int8)
        names = tuple(str(n) for n in self.feature_names)
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, m = X.shape
        if n < 2 or m < 1:
            raise DataError(f"need at least 2 rows and 1 feature, got {n}x{m}")
        if y.shape != (n,) or z.shape != (n,):
            raise DataError("labels/protected length must match feature rows")
        if not np.all(np.isin(y, (-1, 1))):
            raise DataError("labels must take values in {-1, +1}")
        if not np.all(np.isin(z, (0, 1))):
            raise DataError("protected must take values in {0, 1}")
        if len(names) != m:
            raise DataError(f"expected {m} feature names, got {len(names)}")
        if len(set(names)) != m:
            raise DataError("feature names must be unique")
        for arr in (X, y, z):
            arr.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "protected", z)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        """New Dataset restricted to the given row indices."""
        return Dataset(
            self.features[rows],
            self.labels[rows],
            self.protected[rows],
            self.feature_names,
        )


def _check_fields(config, allowed: dict) -> None:
    for key, value in allowed.items():
        if not value:
            raise ConfigError(f"{type(config).__name__}.{key}: {getattr(config, key)!r} is invalid")


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of the synthetic data-generating process.

    Four feature blocks: G1 (shifted by the protected attribute and tied
    to the label), G2 (shifted only), G3 (tied to the label only),
    G4 (pure noise).
    """

    n_samples: int = 2000
    group_sizes: tuple[int, int, int, int] = (10, 10, 10, 10)
    pi: float = 0.2
    alpha_signal: float = 2.0
    beta_coef: float = 1.0
    beta0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "group_sizes", tuple(int(g) for g in self.group_sizes))
        _check_fields(
            self,
            {
                "n_samples": int(self.n_samples) >= 2,
                "group_sizes": len(self.group_sizes) == 4 and all(g >= 1 for g in self.group_sizes),
                "pi": 0.0 < float(self.pi) < 1.0,
            },
        )

    @property
    def n_features(self) -> int:
        return sum(self.group_sizes)

    def group_slices(self) -> dict[str, tuple[int, int]]:
        """Half-open [start, stop) column range of each block G1..G4."""
        out, start = {}, 0
        for k, size in enumerate(self.group_sizes, start=1):
            out[f"G{k}"] = (start, start + size)
            start += size
        return out

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "group_sizes": list(self.group_sizes),
            "pi": self.pi,
            "alpha_signal": self.alpha_signal,
            "beta_coef": self.beta_coef,
            "beta0": self.beta0,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimulationConfig":
        return _from_dict(cls, doc)


@dataclass(frozen=True)
class IngestConfig:
    """How to read a raw CSV into a Dataset.

    Label and protected encodings are explicit (no inference) so that a
    polarity mistake cannot silently flip the fairness metrics.
    """

    label_column: str = "y"
    protected_column: str = "z"
    positive_label_value: str = "1"
    protected_reference_value: str = "1"
    categorical_columns: tuple[str, ...] = ()
    drop_columns: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "categorical_columns", tuple(self.categorical_columns))
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))
        if self.label_column in self.drop_columns or self.protected_column in self.drop_columns:
            raise ConfigError("label/protected columns cannot be in drop_columns")

    def to_dict(self) -> dict:
        return {
            "label_column": self.label_column,
            "protected_column": self.protected_column,
            "positive_label_value": self.positive_label_value,
            "protected_reference_value": self.protected_reference_value,
            "categorical_columns": list(self.categorical_columns),
            "drop_columns": list(self.drop_columns),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "IngestConfig":
        return _from_dict(cls, doc)


def _from_dict(cls, doc: dict):
    if not isinstance(doc, dict):
        raise ConfigError(f"{cls.__name__} document must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad {cls.__name__}: {exc}") from exc


def simulate(config: SimulationConfig) -> Dataset:
    """Draw a synthetic dataset from the four-block generative model.

    z ~ Bernoulli(pi); x_j = alpha_j * z + standard normal noise with
    alpha_j = alpha_signal on G1 and G2, 0 elsewhere; the label follows a
    logistic model on beta0 + sum_j beta_j * sin(x_j) with beta_j =
    beta_coef on G1 and G3, 0 elsewhere. Deterministic given the seed.
    """
    if not isinstance(config, SimulationConfig):
        config = SimulationConfig.from_dict(dict(config))
    rng = np.random.default_rng(config.seed)
    N, M = config.n_samples, config.n_features
    slices = config.group_slices()

    alpha = np.zeros(M)
    beta = np.zeros(M)
    for name in ("G1", "G2"):
        alpha[slice(*slices[name])] = config.alpha_signal
    for name in ("G1", "G3"):
        beta[slice(*slices[name])] = config.beta_coef

    z = (rng.random(N) < config.pi).astype(np.int8)
    X = rng.standard_normal((N, M)) + np.outer(z, alpha)
    f = config.beta0 + np.sin(X) @ beta
    prob_pos = 1.0 / (1.0 + np.exp(-f))
    y = np.where(rng.random(N) < prob_pos, 1, -1).astype(np.int8)

    names = tuple(f"f_{j}" for j in range(M))
    return Dataset(X, y, z, names)


def load_csv(path, config: IngestConfig) -> Dataset:
    """Ingest a header-first CSV into a Dataset.

    Categorical columns are one-hot encoded as "col=value" indicators
    (sorted by value); every other non-label column is parsed as a real.
    Rows containing unparseable numeric cells are dropped; the drop count
    is reported through a warning.
    """
    if not isinstance(config, IngestConfig):
        config = IngestConfig.from_dict(dict(config))
    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True, keep_default_na=False)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise SchemaError(f"cannot parse CSV {path}: {exc}") from exc
    if raw.shape[1] == 0 or raw.shape[0] == 0:
        raise DataError(f"{path}: empty table")
    raw.columns = [str(c).strip() for c in raw.columns]

    for col in (config.label_column, config.protected_column):
        if col not in raw.columns:
            raise SchemaError(f"{path}: missing required column {col!r}")
    for col in config.categorical_columns:
        if col not in raw.columns and col not in config.drop_columns:
            raise SchemaError(f"{path}: categorical column {col!r} not found")

    table = raw.drop(columns=[c for c in config.drop_columns if c in raw.columns])
    table = table.apply(lambda s: s.str.strip())

    y = np.where(table[config.label_column] == config.positive_label_value, 1, -1).astype(np.int8)
    z = np.where(table[config.protected_column] == config.protected_reference_value, 1, 0).astype(np.int8)
    feats = table.drop(columns=[config.label_column, config.protected_column])

    blocks: list[np.ndarray] = []
    names: list[str] = []
    keep = np.ones(len(table), dtype=bool)
    categorical = set(config.categorical_columns)
    for col in feats.columns:
        if col in categorical:
            values = sorted(feats[col].unique())
            for value in values:
                blocks.append((feats[col] == value).to_numpy(dtype=np.float64))
                names.append(f"{col}={value}")
        else:
            parsed = pd.to_numeric(feats[col].replace("", np.nan), errors="coerce").to_numpy(np.float64)
            keep &= np.isfinite(parsed)
            blocks.append(parsed)
            names.append(col)

    dropped = int((~keep).sum())
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with unparseable numeric cells")
    if keep.sum() < 2:
        raise DataError(f"{path}: fewer than 2 usable rows after filtering")
    X = np.column_stack(blocks)[keep]
    return Dataset(X, y[keep], z[keep], tuple(names))


def train_test_split(data: Dataset, test_fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Disjoint row partition, stratified jointly on (label, protected).

    Each of the four (y, z) cells keeps its proportion within one row.
    Falls back to an unstratified split (with a warning) when some cell
    has fewer than 2 rows.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    N = data.n_samples

    cells = []
    stratified = True
    for yv in (-1, 1):
        for zv in (0, 1):
            idx = np.nonzero((data.labels == yv) & (data.protected == zv))[0]
            if 0 < idx.size < 2:
                stratified = False
            cells.append(idx)

    test_parts = []
    if stratified:
        for idx in cells:
            if idx.size == 0:
                continue
            perm = idx[rng.permutation(idx.size)]
            n_test = int(round(test_fraction * idx.size))
            n_test = min(max(n_test, 0), idx.size - 1) if idx.size > 1 else 0
            test_parts.append(perm[:n_test])
    else:
        warnings.warn("a (y, z) cell has fewer than 2 rows; falling back to unstratified split")
        perm = rng.permutation(N)
        n_test = max(1, min(N - 1, int(round(test_fraction * N))))
        test_parts.append(perm[:n_test])

    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.array([], dtype=int)
    mask = np.zeros(N, dtype=bool)
    mask[test_idx] = True
    if mask.all() or not mask.any():
        raise DataError("degenerate split: one side is empty")
    return data.subset(np.nonzero(~mask)[0]), data.subset(np.nonzero(mask)[0])


def _format_value(v: float) -> str:
    # repr of a Python float is the shortest string that round-trips.
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def write_dataset_csv(data: Dataset, path) -> None:
    """Serialize a Dataset with feature columns, then y and z.

    Floats are written with shortest round-trip formatting so a reload
    recovers the exact binary values.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(list(data.feature_names) + ["y", "z"]) + "\n")
        for i in range(data.n_samples):
            cells = [_format_value(v) for v in data.features[i]]
            cells.append(str(int(data.labels[i])))
            cells.append(str(int(data.protected[i])))
            fh.write(",".join(cells) + "\n")


def write_group_sidecar(config: SimulationConfig, path) -> None:
    """Record the simulated feature-block column ranges next to the CSV."""
    doc = {
        "schema_version": 1,
        "groups": {k: list(v) for k, v in config.group_slices().items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
