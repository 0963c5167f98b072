"""Decision-tree extraction from trained feed-forward networks."""

from ._core import (
    CompareReport,
    Dataset,
    DecisionTree,
    ExtractionResult,
    Metrics,
    Network,
    RuntimeError,
    Schema,
    TrainReport,
    TreeComplexity,
    ValidationError,
    accuracy,
    bin_target,
    compare_report,
    evaluate_tree,
    extract_tree,
    fidelity,
    induce_c45,
    kappa,
    per_class_accuracy,
    split_dataset,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CompareReport",
    "Dataset",
    "DecisionTree",
    "ExtractionResult",
    "Metrics",
    "Network",
    "RuntimeError",
    "Schema",
    "TrainReport",
    "TreeComplexity",
    "ValidationError",
    "accuracy",
    "bin_target",
    "compare_report",
    "evaluate_tree",
    "extract_tree",
    "fidelity",
    "induce_c45",
    "kappa",
    "per_class_accuracy",
    "split_dataset",
    "train",
]
