"""Evaluation protocol: split, train, tweak every test instance both ways,
aggregate cost / compactness / accuracy / runtime / pruning into a report.

Means are taken over successful transformations only; failures surface in a
separate success-rate column.  Per-direction means get equal weight in the
reported macro-average.  Timing uses a monotonic clock around each
single-instance call, so parallel callers would not distort per-transform
seconds; it can be disabled entirely to make reports byte-reproducible.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractViolation, ShapeTweakError, TrainingError
from .forest import ForestConfig, ShapeletForest, train
from .series import as_values, euclidean_distance
from .tweak import (
    TweakConfig,
    TweakResult,
    tweak_irreversible,
    tweak_nn,
    tweak_reversible,
    tweak_reversible_pruned,
)

__all__ = [
    "ExperimentConfig",
    "MethodMetrics",
    "MetricsReport",
    "mean_cost",
    "compactness",
    "accuracy",
    "nearest_neighbor_classifier",
    "stratified_split",
    "run_experiment",
    "format_summary_table",
    "format_runtime_table",
    "report_csv_rows",
    "write_report_csv",
    "write_audit_records",
]

METHOD_NAMES = ("rt", "irt", "nn")


@dataclass(frozen=True)
class ExperimentConfig:
    """Evaluation knobs; ``seed`` drives the split and the forest."""

    seed: int = 0
    test_fraction: float = 0.2
    compactness_e: float = 1e-9
    methods: tuple[str, ...] = METHOD_NAMES
    directions: tuple[tuple[str, str], ...] | None = None
    forest: ForestConfig = field(default_factory=ForestConfig)
    tweak: TweakConfig = field(default_factory=TweakConfig)
    record_timing: bool = True
    run_unpruned: bool = False

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ContractViolation("test_fraction must be in (0, 1)")
        if self.compactness_e < 0:
            raise ContractViolation("compactness threshold must be >= 0")
        unknown = set(self.methods) - set(METHOD_NAMES)
        if unknown:
            raise ContractViolation(f"unknown methods: {sorted(unknown)}")


@dataclass(frozen=True)
class MethodMetrics:
    method: str
    n_attempted: int
    n_succeeded: int
    mean_cost: float
    mean_compactness: float
    success_rate: float
    seconds_per_transform: float
    pruned_fraction: float


@dataclass(frozen=True)
class MetricsReport:
    dataset: str
    series_length: int | None
    forest_accuracy: float
    nn_accuracy: float | None
    methods: dict[str, MethodMetrics]
    records: tuple[dict, ...]
    resolved_config: dict


def mean_cost(results: Iterable[TweakResult]) -> float:
    """Mean Euclidean cost over successful results.

    Failed transformations are excluded; with zero successes the mean is NaN
    (the success rate carries that information).  An empty input is an error.
    """
    results = list(results)
    if not results:
        raise ShapeTweakError("mean_cost needs at least one result")
    costs = [r.cost for r in results if r.success]
    if not costs:
        return math.nan
    return float(np.mean(costs))


def compactness(original, transformed, e: float = 1e-9) -> float:
    """Fraction of positions changed by more than ``e``.

    0 means the series is untouched, 1 means every sample moved.
    """
    ov = as_values(original)
    tv = as_values(transformed)
    if ov.shape != tv.shape:
        raise ContractViolation("original and transformed series differ in length")
    return float(np.mean(np.abs(ov - tv) > e))


def accuracy(classify: Callable, test_set: Sequence[tuple]) -> float:
    """Fraction of test pairs whose predicted label matches the true label."""
    if not test_set:
        raise ContractViolation("empty test set")
    hits = sum(1 for series, label in test_set if classify(series) == str(label))
    return hits / len(test_set)


def nearest_neighbor_classifier(training_set: Sequence[tuple]) -> Callable:
    """1-NN under Euclidean distance over the training set."""
    prepared = [(as_values(s), str(label)) for s, label in training_set]
    if not prepared:
        raise ContractViolation("empty training set")

    def classify(series) -> str:
        values = as_values(series)
        best = None
        best_dist = np.inf
        for candidate, label in prepared:
            if candidate.size != values.size:
                continue
            dist = euclidean_distance(values, candidate)
            if dist < best_dist:
                best_dist = dist
                best = label
        if best is None:
            raise ContractViolation("no training series of matching length")
        return best

    return classify


def stratified_split(dataset: Sequence[tuple], test_fraction: float,
                     rng: np.random.Generator) -> tuple[list, list]:
    """Per-class shuffled split; errors out if a class would vanish from train."""
    by_label: dict[str, list[int]] = {}
    for index, (_, label) in enumerate(dataset):
        by_label.setdefault(str(label), []).append(index)

    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_label):
        indices = np.array(by_label[label])
        rng.shuffle(indices)
        n_test = int(round(len(indices) * test_fraction))
        if n_test >= len(indices):
            raise TrainingError(
                f"class {label!r} would have no training instances; "
                "lower test_fraction or reshuffle with another seed"
            )
        test_idx.extend(indices[:n_test].tolist())
        train_idx.extend(indices[n_test:].tolist())
    train_idx.sort()
    test_idx.sort()
    return [dataset[i] for i in train_idx], [dataset[i] for i in test_idx]


def _timed(call: Callable, record_timing: bool) -> tuple[TweakResult, float]:
    if not record_timing:
        return call(), 0.0
    start = time.perf_counter()
    result = call()
    return result, time.perf_counter() - start


def _nanmean(values: list[float]) -> float:
    values = [v for v in values if not math.isnan(v)]
    return float(np.mean(values)) if values else math.nan


def run_experiment(dataset: Sequence[tuple], config: ExperimentConfig | None = None,
                   name: str = "dataset",
                   forest: ShapeletForest | None = None) -> MetricsReport:
    """Run the full protocol on one labeled dataset.

    Splits with the configured seed, trains a forest on the train portion
    (unless one is supplied), then tweaks every test instance toward each
    direction's target with every selected method.  A direction (a, b) covers
    the test instances the forest classifies as a, tweaked toward b; binary
    datasets default to both directions.
    """
    config = config or ExperimentConfig()
    labels = sorted({str(label) for _, label in dataset})
    directions = config.directions
    if directions is None:
        if len(labels) != 2:
            raise ContractViolation(
                "default directions need a binary dataset; pass explicit (source, target) pairs"
            )
        directions = ((labels[0], labels[1]), (labels[1], labels[0]))

    split_rng = np.random.default_rng(np.random.SeedSequence((config.seed, 0)))
    train_set, test_set = stratified_split(dataset, config.test_fraction, split_rng)
    if forest is None:
        forest = train(train_set, replace(config.forest, seed=config.seed))

    forest_acc = accuracy(forest.predict, test_set)
    lengths = {as_values(s).size for s, _ in dataset}
    series_length = lengths.pop() if len(lengths) == 1 else None
    nn_acc = (
        accuracy(nearest_neighbor_classifier(train_set), test_set)
        if series_length is not None
        else None
    )

    methods = list(config.methods)
    if config.run_unpruned:
        methods.append("rt_unpruned")

    records: list[dict] = []
    # per (method, direction) accumulators
    per_dir: dict[tuple[str, str], dict] = {}

    def runner(method: str, series, target: str) -> Callable:
        if method == "rt":
            return lambda: tweak_reversible_pruned(forest, series, target, config.tweak)
        if method == "rt_unpruned":
            return lambda: tweak_reversible(forest, series, target, config.tweak)
        if method == "irt":
            return lambda: tweak_irreversible(forest, series, target, config.tweak)
        if method == "nn":
            return lambda: tweak_nn(series, target, train_set, forest=forest)
        raise ContractViolation(f"unknown method {method!r}")

    for source, target in directions:
        direction_key = f"{source}->{target}"
        for instance_index, (series, _) in enumerate(test_set):
            values = as_values(series)
            if forest.predict(values) != source:
                continue
            for method in methods:
                result, seconds = _timed(runner(method, values, target), config.record_timing)
                compact = compactness(values, result.transformed, config.compactness_e)
                acc = per_dir.setdefault((method, direction_key), {
                    "costs": [], "compacts": [], "seconds": [],
                    "pruned": [], "succeeded": 0, "attempted": 0,
                })
                acc["attempted"] += 1
                acc["seconds"].append(seconds)
                if result.pruned_fraction is not None:
                    acc["pruned"].append(result.pruned_fraction)
                if result.abandoned_fraction is not None:
                    acc["pruned"].append(result.abandoned_fraction)
                if result.success:
                    acc["succeeded"] += 1
                    acc["costs"].append(result.cost)
                    acc["compacts"].append(compact)
                records.append({
                    "instance": instance_index,
                    "direction": direction_key,
                    "method": method,
                    "cost": result.cost,
                    "compactness": compact,
                    "success": result.success,
                    "seconds": seconds,
                    "n_edits": len(result.edits),
                    "pruned_fraction": result.pruned_fraction,
                    "abandoned_fraction": result.abandoned_fraction,
                })

    method_metrics: dict[str, MethodMetrics] = {}
    for method in methods:
        dir_costs, dir_compacts, dir_rates, dir_seconds, dir_pruned = [], [], [], [], []
        attempted = succeeded = 0
        for (m, _), acc in per_dir.items():
            if m != method:
                continue
            attempted += acc["attempted"]
            succeeded += acc["succeeded"]
            dir_costs.append(float(np.mean(acc["costs"])) if acc["costs"] else math.nan)
            dir_compacts.append(float(np.mean(acc["compacts"])) if acc["compacts"] else math.nan)
            dir_rates.append(acc["succeeded"] / acc["attempted"] if acc["attempted"] else math.nan)
            dir_seconds.append(float(np.mean(acc["seconds"])) if acc["seconds"] else math.nan)
            dir_pruned.append(float(np.mean(acc["pruned"])) if acc["pruned"] else math.nan)
        method_metrics[method] = MethodMetrics(
            method=method,
            n_attempted=attempted,
            n_succeeded=succeeded,
            mean_cost=_nanmean(dir_costs),
            mean_compactness=_nanmean(dir_compacts),
            success_rate=_nanmean(dir_rates),
            seconds_per_transform=_nanmean(dir_seconds),
            pruned_fraction=_nanmean(dir_pruned),
        )

    resolved = {
        "dataset": name,
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "compactness_e": config.compactness_e,
        "methods": methods,
        "directions": [list(d) for d in directions],
        "forest": {
            "n_trees": config.forest.n_trees,
            "shapelets_per_node": config.forest.shapelets_per_node,
            "min_shapelet_length": config.forest.min_shapelet_length,
            "max_shapelet_length": config.forest.max_shapelet_length,
        },
        "epsilon": config.tweak.epsilon,
        "record_timing": config.record_timing,
    }
    return MetricsReport(
        dataset=name,
        series_length=series_length,
        forest_accuracy=forest_acc,
        nn_accuracy=nn_acc,
        methods=method_metrics,
        records=tuple(records),
        resolved_config=resolved,
    )


def _fmt(value, width: int = 8) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-".rjust(width)
    if isinstance(value, float):
        return f"{value:.4f}".rjust(width)
    return str(value).rjust(width)


def _avg_over(reports: Sequence[MetricsReport], pick: Callable) -> float:
    values = [pick(r) for r in reports]
    values = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(values)) if values else math.nan


def format_summary_table(reports: Sequence[MetricsReport]) -> str:
    """Cost | Compactness | Accuracy table, one row per dataset plus Avg."""
    name_width = max([len(r.dataset) for r in reports] + [len("Avg."), 7])
    header1 = (
        f"{'':<{name_width}} | {'Cost':^26} | {'Compactness':^26} | {'Accuracy':^17}"
    )
    header2 = (
        f"{'Dataset':<{name_width}} | {'rt':>8} {'irt':>8} {'nn':>8} | "
        f"{'rt':>8} {'irt':>8} {'nn':>8} | {'RSF':>8} {'NN(1)':>8}"
    )
    lines = [header1, header2, "-" * len(header2)]

    def row(label: str, get) -> str:
        cells = [
            _fmt(get("rt", "mean_cost")), _fmt(get("irt", "mean_cost")), _fmt(get("nn", "mean_cost")),
        ]
        cells2 = [
            _fmt(get("rt", "mean_compactness")), _fmt(get("irt", "mean_compactness")),
            _fmt(get("nn", "mean_compactness")),
        ]
        cells3 = [_fmt(get("__forest__", "")), _fmt(get("__nn1__", ""))]
        return (
            f"{label:<{name_width}} | {' '.join(cells)} | {' '.join(cells2)} | {' '.join(cells3)}"
        )

    for report in reports:
        def get(method, field_name, _r=report):
            if method == "__forest__":
                return _r.forest_accuracy
            if method == "__nn1__":
                return _r.nn_accuracy
            metric = _r.methods.get(method)
            return getattr(metric, field_name) if metric else None
        lines.append(row(report.dataset, get))

    def get_avg(method, field_name):
        if method == "__forest__":
            return _avg_over(reports, lambda r: r.forest_accuracy)
        if method == "__nn1__":
            return _avg_over(reports, lambda r: r.nn_accuracy)
        return _avg_over(
            reports,
            lambda r: getattr(r.methods[method], field_name) if method in r.methods else math.nan,
        )

    lines.append("-" * len(header2))
    lines.append(row("Avg.", get_avg))
    return "\n".join(lines)


def format_runtime_table(reports: Sequence[MetricsReport]) -> str:
    """|T| | Runtime (seconds per transformation) | Fraction pruned table."""
    name_width = max([len(r.dataset) for r in reports] + [len("Avg."), 7])
    header1 = (
        f"{'':<{name_width}} | {'|T|':>6} | {'Runtime (s/transform)':^35} | {'Fraction pruned':^17}"
    )
    header2 = (
        f"{'Dataset':<{name_width}} | {'':>6} | {'rt (no prune)':>13} {'rt':>10} {'irt':>10} | "
        f"{'rt':>8} {'irt':>8}"
    )
    lines = [header1, header2, "-" * len(header2)]

    def row(label: str, length, get) -> str:
        return (
            f"{label:<{name_width}} | {_fmt(length, 6)} | "
            f"{_fmt(get('rt_unpruned', 'seconds_per_transform'), 13)} "
            f"{_fmt(get('rt', 'seconds_per_transform'), 10)} "
            f"{_fmt(get('irt', 'seconds_per_transform'), 10)} | "
            f"{_fmt(get('rt', 'pruned_fraction'))} {_fmt(get('irt', 'pruned_fraction'))}"
        )

    for report in reports:
        def get(method, field_name, _r=report):
            metric = _r.methods.get(method)
            return getattr(metric, field_name) if metric else None
        lines.append(row(report.dataset, report.series_length, get))

    def get_avg(method, field_name):
        return _avg_over(
            reports,
            lambda r: getattr(r.methods[method], field_name) if method in r.methods else math.nan,
        )

    lines.append("-" * len(header2))
    lines.append(row("Avg.", None, get_avg))
    return "\n".join(lines)


CSV_HEADER = (
    "dataset,method,n_attempted,n_succeeded,success_rate,mean_cost,"
    "mean_compactness,seconds_per_transform,pruned_fraction,"
    "forest_accuracy,nn_accuracy"
)


def report_csv_rows(reports: Sequence[MetricsReport]) -> list[str]:
    def num(value) -> str:
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return ""
        return repr(float(value))

    rows = [CSV_HEADER]
    for report in reports:
        for method in report.methods.values():
            rows.append(",".join([
                report.dataset,
                method.method,
                str(method.n_attempted),
                str(method.n_succeeded),
                num(method.success_rate),
                num(method.mean_cost),
                num(method.mean_compactness),
                num(method.seconds_per_transform),
                num(method.pruned_fraction),
                num(report.forest_accuracy),
                num(report.nn_accuracy),
            ]))
    return rows


def write_report_csv(reports: Sequence[MetricsReport], path) -> None:
    from .persistence import atomic_write_text

    atomic_write_text(path, "\n".join(report_csv_rows(reports)) + "\n")


def write_audit_records(report: MetricsReport, path) -> None:
    """Per-instance audit log, one JSON object per line."""
    from .persistence import atomic_write_text

    lines = [json.dumps(record, sort_keys=True) for record in report.records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
