"""Versioned forest persistence with bit-exact double round-trips.

The on-disk format is JSON: a header (format version, hyperparameters, label
set) plus one flat node list per tree.  Node records reference children by
list offset; leaves carry only their label.  Floats are serialized with
Python's shortest-round-trip repr, so values survive save/load bit-exactly,
and the writer is canonical (sorted keys, fixed separators), so the same
forest always produces the same bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import ShapeTweakError
from .forest import ForestConfig, Leaf, ShapeletForest, ShapeletTree, Split
from .series import Shapelet

__all__ = ["FORMAT_VERSION", "save_forest", "load_forest", "dumps_forest", "loads_forest", "atomic_write_text"]

FORMAT_VERSION = 1


def atomic_write_text(path, text: str) -> None:
    """Write a whole file via temp-then-rename so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flatten_tree(tree: ShapeletTree) -> list[dict]:
    nodes: list[dict] = []

    def add(node) -> int:
        index = len(nodes)
        if isinstance(node, Leaf):
            nodes.append({"label": node.label})
            return index
        nodes.append({})  # reserve the slot so children come after their parent
        left = add(node.left)
        right = add(node.right)
        nodes[index] = {
            "shapelet": list(node.shapelet.values),
            "threshold": node.threshold,
            "left": left,
            "right": right,
        }
        return index

    add(tree.root)
    return nodes


def _rebuild_tree(nodes: list[dict]) -> ShapeletTree:
    def build(index: int):
        record = nodes[index]
        if "label" in record:
            return Leaf(str(record["label"]))
        return Split(
            Shapelet(record["shapelet"]),
            float(record["threshold"]),
            build(int(record["left"])),
            build(int(record["right"])),
        )

    return ShapeletTree(build(0))


def dumps_forest(forest: ShapeletForest) -> str:
    cfg = forest.config
    document = {
        "format_version": FORMAT_VERSION,
        "config": {
            "n_trees": cfg.n_trees,
            "shapelets_per_node": cfg.shapelets_per_node,
            "min_shapelet_length": cfg.min_shapelet_length,
            "max_shapelet_length": cfg.max_shapelet_length,
            "seed": cfg.seed,
        },
        "labels": list(forest.labels),
        "trees": [_flatten_tree(tree) for tree in forest.trees],
    }
    return json.dumps(document, sort_keys=True, separators=(",", ":")) + "\n"


def loads_forest(text: str) -> ShapeletForest:
    document = json.loads(text)
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ShapeTweakError(f"unsupported model format version: {version!r}")
    cfg = document["config"]
    config = ForestConfig(
        n_trees=int(cfg["n_trees"]),
        shapelets_per_node=int(cfg["shapelets_per_node"]),
        min_shapelet_length=int(cfg["min_shapelet_length"]),
        max_shapelet_length=(
            None if cfg["max_shapelet_length"] is None else int(cfg["max_shapelet_length"])
        ),
        seed=int(cfg["seed"]),
    )
    trees = [_rebuild_tree(nodes) for nodes in document["trees"]]
    labels = [str(label) for label in document["labels"]]
    return ShapeletForest(trees, labels, config)


def save_forest(forest: ShapeletForest, path) -> None:
    atomic_write_text(path, dumps_forest(forest))


def load_forest(path) -> ShapeletForest:
    with open(path) as handle:
        return loads_forest(handle.read())
