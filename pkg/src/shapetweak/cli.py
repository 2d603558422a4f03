"""Command-line surface: train, tweak, evaluate, oracle.

Every run prints its fully resolved configuration to stderr, so any output
can be reproduced from that line plus the input files.  Exit codes: 0 on
success, 2 for dataset parse errors, 3 for contract violations, 4 when no
tweak succeeded (or the oracle found no solution within budget), 5 when the
selected instances already carry the desired label.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ContractViolation, DatasetParseError, ShapeTweakError
from .evaluate import (
    ExperimentConfig,
    accuracy,
    compactness,
    format_runtime_table,
    format_summary_table,
    run_experiment,
    stratified_split,
    write_audit_records,
    write_report_csv,
)
from .forest import ForestConfig, train
from .oracle import brute_force_min_changes, decode_bits, encode_instance, hitting_set_forest
from .persistence import atomic_write_text, load_forest, save_forest
from .tweak import TweakConfig, tweak_irreversible, tweak_nn, tweak_reversible_pruned
from .ucr import load_dataset, write_series_plot_data

EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_CONTRACT_VIOLATION = 3
EXIT_NO_SUCCESSFUL_TWEAK = 4
EXIT_NO_TWEAK_NEEDED = 5

# Bundled hitting-set toy instance: ground set {0,1,2}, sets {0,1} and {1,2};
# flipping position 1 alone hits both sets.
DEMO_INSTANCE = {
    "n": 3,
    "sets": [[0, 1], [1, 2]],
    "bits": [0, 0, 0],
    "desired": "1",
}


def _log_config(command: str, resolved: dict) -> None:
    print(f"resolved-config {command}: {json.dumps(resolved, sort_keys=True)}", file=sys.stderr)


def _add_forest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--shapelets-per-node", type=int, default=100)
    parser.add_argument("--min-len", type=int, default=2)
    parser.add_argument("--max-len", type=int, default=None,
                        help="maximum shapelet length (default: all possible sizes)")


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delimiter", default=None, help="field delimiter (default: autodetect)")
    parser.add_argument("--normalize", action="store_true",
                        help="z-normalize each series at load time")


def _forest_config(args) -> ForestConfig:
    return ForestConfig(
        n_trees=args.trees,
        shapelets_per_node=args.shapelets_per_node,
        min_shapelet_length=args.min_len,
        max_shapelet_length=args.max_len,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    data = load_dataset(args.data, delimiter=args.delimiter, normalize=args.normalize)
    config = _forest_config(args)
    _log_config("train", {
        "data": str(args.data), "model": str(args.model),
        "n_trees": config.n_trees, "shapelets_per_node": config.shapelets_per_node,
        "min_shapelet_length": config.min_shapelet_length,
        "max_shapelet_length": config.max_shapelet_length,
        "seed": config.seed, "normalize": args.normalize,
        "holdout_fraction": args.holdout_fraction,
    })

    records = data.records
    summary: dict = {"rows": data.n_rows, "series_length": data.series_length}
    if args.holdout_fraction > 0:
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, 1)))
        records, holdout = stratified_split(records, args.holdout_fraction, rng)
        forest = train(records, config)
        summary["holdout_accuracy"] = accuracy(forest.predict, holdout)
        summary["holdout_size"] = len(holdout)
    else:
        forest = train(records, config)

    save_forest(forest, args.model)
    summary["labels"] = list(forest.labels)
    summary["model"] = str(args.model)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _tweak_one(method: str, forest, values, target: str, tweak_config, train_records):
    if method == "rt":
        return tweak_reversible_pruned(forest, values, target, tweak_config)
    if method == "irt":
        return tweak_irreversible(forest, values, target, tweak_config)
    if method == "nn":
        if train_records is None:
            raise ContractViolation("--method nn needs --train-data for the neighbor pool")
        return tweak_nn(values, target, train_records, forest=forest)
    raise ContractViolation(f"unknown method {method!r}")


def cmd_tweak(args) -> int:
    forest = load_forest(args.model)
    data = load_dataset(args.data, delimiter=args.delimiter, normalize=args.normalize)
    train_records = None
    if args.train_data is not None:
        train_records = load_dataset(
            args.train_data, delimiter=args.delimiter, normalize=args.normalize
        ).records
    tweak_config = TweakConfig(epsilon=args.epsilon)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _log_config("tweak", {
        "model": str(args.model), "data": str(args.data), "target_label": args.target_label,
        "method": args.method, "epsilon": args.epsilon, "index": args.index,
        "compactness_e": args.compactness_e, "out_dir": str(out_dir),
        "normalize": args.normalize,
    })

    if args.index is not None:
        if not 0 <= args.index < data.n_rows:
            raise ContractViolation(f"--index {args.index} outside 0..{data.n_rows - 1}")
        selected = [(args.index, data.records[args.index])]
    else:
        selected = list(enumerate(data.records))

    stem = Path(args.data).stem
    reports = []
    attempted = succeeded = 0
    for row_index, (label, values) in selected:
        prefix = stem if args.index is not None else f"{stem}.row{row_index}"
        before = forest.predict(values)
        if before == args.target_label:
            reports.append({
                "row": row_index, "label": label, "before": before,
                "status": "no tweak needed",
            })
            continue
        attempted += 1
        result = _tweak_one(
            args.method, forest, values, args.target_label, tweak_config, train_records
        )
        after = forest.predict(result.transformed)
        write_series_plot_data(values, out_dir / f"{prefix}.original.{args.method}.txt")
        write_series_plot_data(
            result.transformed.values, out_dir / f"{prefix}.tweaked.{args.method}.txt"
        )
        if result.success:
            succeeded += 1
        reports.append({
            "row": row_index, "label": label,
            "before": before, "after": after,
            "status": "success" if result.success else "failed",
            "cost": result.cost,
            "compactness": compactness(values, result.transformed, args.compactness_e),
            "edits": [list(edit) for edit in result.edits],
            "candidate_index": list(result.candidate_index) if result.candidate_index else None,
        })

    report_path = out_dir / f"{stem}.{args.method}.report.json"
    atomic_write_text(report_path, json.dumps(reports, indent=2, sort_keys=True) + "\n")
    print(json.dumps({"report": str(report_path), "attempted": attempted,
                      "succeeded": succeeded}, sort_keys=True))
    if attempted == 0:
        return EXIT_NO_TWEAK_NEEDED
    if succeeded == 0:
        return EXIT_NO_SUCCESSFUL_TWEAK
    return EXIT_OK


def cmd_evaluate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = ExperimentConfig(
        seed=args.seed,
        test_fraction=args.test_fraction,
        compactness_e=args.compactness_e,
        forest=_forest_config(args),
        tweak=TweakConfig(epsilon=args.epsilon),
        record_timing=not args.no_timing,
        run_unpruned=args.run_unpruned,
    )
    _log_config("evaluate", {
        "data": [str(p) for p in args.data], "out_dir": str(out_dir),
        "seed": config.seed, "test_fraction": config.test_fraction,
        "compactness_e": config.compactness_e, "epsilon": args.epsilon,
        "trees": args.trees, "shapelets_per_node": args.shapelets_per_node,
        "min_len": args.min_len, "max_len": args.max_len,
        "normalize": args.normalize, "record_timing": config.record_timing,
        "run_unpruned": config.run_unpruned,
    })

    reports = []
    for data_path in args.data:
        data = load_dataset(data_path, delimiter=args.delimiter, normalize=args.normalize)
        name = Path(data_path).stem
        report = run_experiment(data.records, config, name=name)
        write_audit_records(report, out_dir / f"{name}.audit.jsonl")
        reports.append(report)

    summary = format_summary_table(reports) + "\n\n" + format_runtime_table(reports) + "\n"
    atomic_write_text(out_dir / "summary.txt", summary)
    write_report_csv(reports, out_dir / "results.csv")
    print(summary, end="")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.instance is not None:
        instance = json.loads(Path(args.instance).read_text())
    else:
        instance = DEMO_INSTANCE
    n = int(instance["n"])
    sets = [list(map(int, subset)) for subset in instance["sets"]]
    bits = [int(b) for b in instance["bits"]]
    desired = str(instance.get("desired", "1"))
    budget = args.budget if args.budget is not None else n
    _log_config("oracle", {
        "instance": str(args.instance) if args.instance else "demo",
        "n": n, "sets": sets, "bits": bits, "desired": desired, "budget": budget,
        "epsilon": args.epsilon,
    })

    toy = hitting_set_forest(n, sets)
    flips = brute_force_min_changes(toy, bits, desired, budget)

    output = {"initial_label": toy.predict(bits), "desired": desired, "budget": budget}
    if flips is None:
        output["status"] = "no solution within budget"
        print(json.dumps(output, sort_keys=True))
        return EXIT_NO_SUCCESSFUL_TWEAK
    output["status"] = "ok"
    output["minimal_flips"] = list(flips)
    output["minimal_flip_count"] = len(flips)

    # greedy comparison on the shapelet-forest encoding of the same instance
    encoded_forest, encoded_series = encode_instance(toy, bits)
    if encoded_forest.predict(encoded_series) != desired:
        comparison = {}
        for method, fn in (("rt", tweak_reversible_pruned), ("irt", tweak_irreversible)):
            result = fn(encoded_forest, encoded_series, desired, TweakConfig(epsilon=args.epsilon))
            changed = int(np.sum(encoded_series.values != result.transformed.values))
            comparison[method] = {
                "success": result.success,
                "positions_changed": changed,
                "tweaked_bits": decode_bits(result.transformed),
            }
        output["greedy"] = comparison
    print(json.dumps(output, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapetweak",
        description="Train random shapelet forests and compute minimum-cost "
                    "series tweaks that flip their predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a forest and persist it")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--model", required=True)
    p_train.add_argument("--holdout-fraction", type=float, default=0.0,
                         help="report accuracy on a held-out slice of this size")
    _add_forest_flags(p_train)
    _add_data_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_tweak = sub.add_parser("tweak", help="tweak series toward a target label")
    p_tweak.add_argument("--model", required=True)
    p_tweak.add_argument("--data", required=True)
    p_tweak.add_argument("--target-label", required=True)
    p_tweak.add_argument("--method", choices=("rt", "irt", "nn"), default="rt")
    p_tweak.add_argument("--epsilon", type=float, default=1.0)
    p_tweak.add_argument("--index", type=int, default=None, help="tweak only this row")
    p_tweak.add_argument("--train-data", default=None,
                         help="training dataset; required by --method nn")
    p_tweak.add_argument("--out-dir", default=".")
    p_tweak.add_argument("--compactness-e", type=float, default=1e-9)
    _add_data_flags(p_tweak)
    p_tweak.set_defaults(func=cmd_tweak)

    p_eval = sub.add_parser("evaluate", help="run the full evaluation protocol")
    p_eval.add_argument("--data", required=True, nargs="+")
    p_eval.add_argument("--out-dir", required=True)
    p_eval.add_argument("--test-fraction", type=float, default=0.2)
    p_eval.add_argument("--epsilon", type=float, default=1.0)
    p_eval.add_argument("--compactness-e", type=float, default=1e-9)
    p_eval.add_argument("--run-unpruned", action="store_true",
                        help="also time reversible tweaking without prediction ordering")
    p_eval.add_argument("--no-timing", action="store_true",
                        help="write zeros for runtimes so outputs are byte-reproducible")
    _add_forest_flags(p_eval)
    _add_data_flags(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_oracle = sub.add_parser("oracle", help="exact minimum-change oracle on a toy instance")
    p_oracle.add_argument("--instance", default=None,
                          help="JSON file with n, sets, bits, desired (default: bundled demo)")
    p_oracle.add_argument("--budget", type=int, default=None)
    p_oracle.add_argument("--epsilon", type=float, default=1.0)
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DatasetParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except (ContractViolation, ShapeTweakError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
