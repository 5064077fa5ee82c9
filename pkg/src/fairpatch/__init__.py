"""Fairness-aware minipatch boosting.

A doubly-stochastic boosting classifier that adaptively learns which
observations and features to sample, trading off accuracy against
demographic parity, with intrinsic importance reports read off the
learned sampling distributions.
"""

__version__ = "0.1.0"

from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .adversary import AdversaryModel, adversary_score, fit_adversary
from .boosting import (
    Ensemble,
    ImportanceReport,
    OopTracker,
    TrainConfig,
    TrainResult,
    decision_value,
    decision_values,
    early_stop_check,
    model_from_dict,
    model_to_dict,
    oop_accuracy,
    predict,
    predict_rows,
    train,
)
from .data import (
    Dataset,
    IngestConfig,
    SimulationConfig,
    load_csv,
    simulate,
    train_test_split,
    write_dataset_csv,
)
from .errors import ConfigError, DataError, FairpatchError, SamplingError, SchemaError
from .metrics import (
    EvaluationReport,
    GroupRates,
    alpha_sweep,
    evaluate,
    evaluate_predictions,
    group_rates,
    summarize_sweep,
)
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
)

__all__ = [
    "KERNEL_IMPLEMENTATION",
    "__version__",
    "AdversaryModel", "adversary_score", "fit_adversary",
    "Ensemble", "ImportanceReport", "OopTracker", "TrainConfig", "TrainResult",
    "decision_value", "decision_values", "early_stop_check", "model_from_dict",
    "model_to_dict", "oop_accuracy", "predict", "predict_rows", "train",
    "Dataset", "IngestConfig", "SimulationConfig", "load_csv", "simulate",
    "train_test_split", "write_dataset_csv",
    "ConfigError", "DataError", "FairpatchError", "SamplingError", "SchemaError",
    "EvaluationReport", "GroupRates", "alpha_sweep", "evaluate",
    "evaluate_predictions", "group_rates", "summarize_sweep",
    "Minipatch", "SamplerState", "init_state", "sample_minipatch",
    "update_feature_probs", "update_observation_probs",
    "DecisionTree", "TreeConfig", "fair_tree_fis", "fit_tree", "predict_batch",
    "predict_tree", "tree_fis",
]
