"""shapetweak: random shapelet forests and minimum-cost prediction tweaking.

Train an ensemble of shapelet trees on labeled uni-variate time series,
decompose it into labeled decision paths, and compute low-cost edits of a
series that flip the ensemble's prediction to a desired class, by reversible
or irreversible greedy tweaking or a nearest-neighbor baseline.
"""

from .datasets import make_planted_dataset
from .errors import ContractViolation, DatasetParseError, ShapeTweakError, TrainingError
from .evaluate import (
    ExperimentConfig,
    MethodMetrics,
    MetricsReport,
    accuracy,
    compactness,
    format_runtime_table,
    format_summary_table,
    mean_cost,
    nearest_neighbor_classifier,
    run_experiment,
    stratified_split,
    write_audit_records,
    write_report_csv,
)
from .forest import (
    GT,
    LEQ,
    DecisionPath,
    ForestConfig,
    Leaf,
    PathCondition,
    ShapeletForest,
    ShapeletTree,
    Split,
    condition_test,
    train,
)
from .oracle import (
    ToyForest,
    ToyLeaf,
    ToySplit,
    brute_force_min_changes,
    decode_bits,
    encode_instance,
    hitting_set_forest,
)
from .persistence import dumps_forest, load_forest, loads_forest, save_forest
from .series import (
    MatchLocation,
    Shapelet,
    Subsequence,
    TimeSeries,
    distance_profile,
    euclidean_distance,
    matches_within,
    subsequence_distance,
)
from .tweak import (
    Edit,
    LockedRegions,
    TweakConfig,
    TweakResult,
    transform_subsequence,
    tweak_irreversible,
    tweak_nn,
    tweak_reversible,
    tweak_reversible_pruned,
)
from .ucr import DatasetFile, load_dataset, parse_ucr, write_dataset, write_series_plot_data

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # series
    "TimeSeries", "Subsequence", "Shapelet", "MatchLocation",
    "euclidean_distance", "distance_profile", "subsequence_distance", "matches_within",
    # forest
    "LEQ", "GT", "PathCondition", "DecisionPath", "Leaf", "Split",
    "ShapeletTree", "ShapeletForest", "ForestConfig", "condition_test", "train",
    "save_forest", "load_forest", "dumps_forest", "loads_forest",
    # tweaking
    "TweakConfig", "TweakResult", "LockedRegions", "Edit", "transform_subsequence",
    "tweak_reversible", "tweak_reversible_pruned", "tweak_irreversible", "tweak_nn",
    # oracle
    "ToyForest", "ToyLeaf", "ToySplit", "hitting_set_forest",
    "brute_force_min_changes", "encode_instance", "decode_bits",
    # evaluation
    "ExperimentConfig", "MethodMetrics", "MetricsReport", "mean_cost", "compactness",
    "accuracy", "nearest_neighbor_classifier", "stratified_split", "run_experiment",
    "format_summary_table", "format_runtime_table", "write_report_csv", "write_audit_records",
    # io
    "DatasetFile", "parse_ucr", "load_dataset", "write_dataset", "write_series_plot_data",
    "make_planted_dataset",
    # errors
    "ShapeTweakError", "ContractViolation", "TrainingError", "DatasetParseError",
]
