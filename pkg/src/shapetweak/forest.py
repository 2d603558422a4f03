"""Random shapelet forest: training, majority-vote prediction, path extraction.

A forest is an ensemble of binary shapelet trees.  Every internal node holds a
shapelet and a distance threshold; a series goes left when its best-match
distance is <= the threshold and right otherwise.  Each root-to-leaf path is
exportable as an ordered list of <shapelet, threshold, direction> conditions
labeled with the leaf class, which is the representation the tweaking
algorithms consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ContractViolation, TrainingError
from .series import Shapelet, TimeSeries, as_values, distance_profile, subsequence_distance

__all__ = [
    "LEQ",
    "GT",
    "PathCondition",
    "DecisionPath",
    "Leaf",
    "Split",
    "ShapeletTree",
    "ForestConfig",
    "ShapeletForest",
    "condition_test",
    "train",
]

# Branch directions. A path condition with direction LEQ is satisfied when the
# best-match distance is <= the threshold; GT when it is strictly greater.
LEQ = -1
GT = 1


@dataclass(frozen=True)
class PathCondition:
    """One internal-node condition along a decision path."""

    shapelet: Shapelet
    threshold: float
    direction: int

    def __post_init__(self):
        if self.direction not in (LEQ, GT):
            raise ContractViolation(f"direction must be -1 or +1, got {self.direction}")
        if self.threshold < 0:
            raise ContractViolation("threshold must be non-negative")


@dataclass(frozen=True)
class DecisionPath:
    """A root-to-leaf rule: all conditions hold iff the series reaches this leaf."""

    conditions: tuple[PathCondition, ...]
    label: str
    tree_index: int
    path_index: int

    def __len__(self) -> int:
        return len(self.conditions)


def condition_test(series, condition: PathCondition) -> bool:
    """Whether a series takes the branch this condition encodes.

    Direction -1 (the <= branch) is satisfied iff the subsequence distance is
    <= the threshold, +1 (the > branch) iff it is strictly greater.  This is
    the branch semantics required by the transform's use of the direction sign
    (the <= branch moves windows inside the threshold sphere, the > branch
    outside).
    """
    dist = subsequence_distance(condition.shapelet, series).distance
    if condition.direction == LEQ:
        return dist <= condition.threshold
    return dist > condition.threshold


@dataclass(frozen=True)
class Leaf:
    label: str


@dataclass(frozen=True)
class Split:
    shapelet: Shapelet
    threshold: float
    left: "Leaf | Split"  # taken when distance <= threshold
    right: "Leaf | Split"


class ShapeletTree:
    """A single binary shapelet tree."""

    __slots__ = ("root",)

    def __init__(self, root: Leaf | Split):
        self.root = root

    def predict(self, series) -> str:
        values = as_values(series)
        node = self.root
        while isinstance(node, Split):
            dist = subsequence_distance(node.shapelet, values).distance
            node = node.left if dist <= node.threshold else node.right
        return node.label

    def paths(self) -> Iterator[tuple[tuple[PathCondition, ...], str]]:
        """Root-to-leaf condition sequences in left-to-right leaf order.

        A single-leaf tree yields nothing: it votes in prediction but offers
        no conditions to tweak.
        """
        if isinstance(self.root, Leaf):
            return
        stack: list[tuple[Leaf | Split, tuple[PathCondition, ...]]] = [(self.root, ())]
        while stack:
            node, prefix = stack.pop()
            if isinstance(node, Leaf):
                yield prefix, node.label
                continue
            left_cond = PathCondition(node.shapelet, node.threshold, LEQ)
            right_cond = PathCondition(node.shapelet, node.threshold, GT)
            # push right first so the left (<=) branch is yielded first
            stack.append((node.right, prefix + (right_cond,)))
            stack.append((node.left, prefix + (left_cond,)))

    def leaf_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                count += 1
            else:
                stack.extend((node.left, node.right))
        return count

    def max_shapelet_length(self) -> int:
        longest = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Split):
                longest = max(longest, len(node.shapelet))
                stack.extend((node.left, node.right))
        return longest


@dataclass(frozen=True)
class ForestConfig:
    """Training hyperparameters.

    ``max_shapelet_length=None`` allows shapelets of all possible sizes, capped
    per node by the shortest series present in that node.
    """

    n_trees: int = 100
    shapelets_per_node: int = 100
    min_shapelet_length: int = 2
    max_shapelet_length: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ContractViolation("n_trees must be >= 1")
        if self.shapelets_per_node < 1:
            raise ContractViolation("shapelets_per_node must be >= 1")
        if self.min_shapelet_length < 1:
            raise ContractViolation("min_shapelet_length must be >= 1")
        if (
            self.max_shapelet_length is not None
            and self.max_shapelet_length < self.min_shapelet_length
        ):
            raise ContractViolation("max_shapelet_length must be >= min_shapelet_length")


class ShapeletForest:
    """An immutable ensemble of shapelet trees with a fixed label order.

    ``labels`` is the sorted tuple of training labels; majority-vote ties are
    broken toward the label that comes first in this order.
    """

    __slots__ = ("trees", "labels", "config", "_max_len")

    def __init__(self, trees: Sequence[ShapeletTree], labels: Sequence[str], config: ForestConfig):
        if not trees:
            raise ContractViolation("forest needs at least one tree")
        if config.n_trees != len(trees):
            raise ContractViolation(
                f"config says {config.n_trees} trees but {len(trees)} were provided"
            )
        self.trees = tuple(trees)
        self.labels = tuple(labels)
        self.config = config
        self._max_len = max(tree.max_shapelet_length() for tree in self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def max_shapelet_length(self) -> int:
        return self._max_len

    def predict(self, series) -> str:
        values = as_values(series)
        longest = self.max_shapelet_length()
        if values.size < longest:
            raise ContractViolation(
                f"series of length {values.size} is shorter than a forest shapelet ({longest})"
            )
        votes = {label: 0 for label in self.labels}
        for tree in self.trees:
            votes[tree.predict(values)] += 1
        # max() keeps the first label (canonical order) on tied counts
        return max(self.labels, key=lambda label: votes[label])

    def extract_paths(self, label: str) -> list[DecisionPath]:
        """Every path of every tree whose leaf label equals ``label``."""
        if label not in self.labels:
            raise ContractViolation(f"unknown label {label!r}; forest knows {self.labels}")
        out: list[DecisionPath] = []
        for tree_index, tree in enumerate(self.trees):
            for path_index, (conditions, leaf_label) in enumerate(tree.paths()):
                if leaf_label == label:
                    out.append(DecisionPath(conditions, leaf_label, tree_index, path_index))
        return out

    def all_paths(self) -> list[DecisionPath]:
        out: list[DecisionPath] = []
        for label in self.labels:
            out.extend(self.extract_paths(label))
        out.sort(key=lambda p: (p.tree_index, p.path_index))
        return out


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _best_threshold(distances: np.ndarray, y: np.ndarray, n_labels: int):
    """Information-gain-optimal midpoint threshold for one candidate shapelet.

    Returns (gain, threshold) or None when the distances admit no split
    (all values identical).
    """
    order = np.argsort(distances, kind="stable")
    d_sorted = distances[order]
    y_sorted = y[order]
    n = d_sorted.size

    boundaries = np.flatnonzero(d_sorted[:-1] < d_sorted[1:])
    if boundaries.size == 0:
        return None

    # class counts left of every boundary via prefix sums
    onehot = np.zeros((n, n_labels), dtype=np.int64)
    onehot[np.arange(n), y_sorted] = 1
    prefix = np.cumsum(onehot, axis=0)
    total = prefix[-1]

    parent_entropy = _entropy(total)
    best_gain = -1.0
    best_threshold = 0.0
    for b in boundaries:
        left = prefix[b]
        right = total - left
        n_left = b + 1
        n_right = n - n_left
        gain = parent_entropy - (
            n_left / n * _entropy(left) + n_right / n * _entropy(right)
        )
        if gain > best_gain:
            best_gain = gain
            best_threshold = 0.5 * (d_sorted[b] + d_sorted[b + 1])
    return best_gain, float(best_threshold)


def _majority_label(y: np.ndarray, labels: tuple[str, ...]) -> str:
    counts = np.bincount(y, minlength=len(labels))
    return labels[int(np.argmax(counts))]


class _TreeGrower:
    def __init__(self, series_values: list[np.ndarray], y: np.ndarray,
                 labels: tuple[str, ...], config: ForestConfig, rng: np.random.Generator):
        self.series_values = series_values
        self.y = y
        self.labels = labels
        self.config = config
        self.rng = rng

    def grow(self, indices: np.ndarray) -> Leaf | Split:
        node_y = self.y[indices]
        if indices.size < 2 or np.all(node_y == node_y[0]):
            return Leaf(_majority_label(node_y, self.labels))

        split = self._find_split(indices)
        if split is None:
            return Leaf(_majority_label(node_y, self.labels))

        shapelet, threshold, node_distances = split
        go_left = node_distances <= threshold
        left = self.grow(indices[go_left])
        right = self.grow(indices[~go_left])
        return Split(shapelet, threshold, left, right)

    def _find_split(self, indices: np.ndarray):
        cfg = self.config
        node_min_len = min(self.series_values[i].size for i in indices)
        max_len = node_min_len if cfg.max_shapelet_length is None else min(
            cfg.max_shapelet_length, node_min_len
        )
        if max_len < cfg.min_shapelet_length:
            return None

        best = None
        best_gain = -1.0
        for _ in range(cfg.shapelets_per_node):
            donor = self.series_values[indices[self.rng.integers(indices.size)]]
            length = int(self.rng.integers(cfg.min_shapelet_length, max_len + 1))
            start = int(self.rng.integers(donor.size - length + 1))
            candidate = donor[start : start + length]

            distances = np.array(
                [subsequence_distance(candidate, self.series_values[i]).distance for i in indices]
            )
            scored = _best_threshold(distances, self.y[indices], len(self.labels))
            if scored is None:
                continue
            gain, threshold = scored
            if gain > best_gain:
                best_gain = gain
                best = (Shapelet(candidate), threshold, distances)
        return best


def train(dataset: Sequence[tuple], config: ForestConfig | None = None) -> ShapeletForest:
    """Train a random shapelet forest on (series, label) pairs.

    Each tree is grown on a bootstrap sample; each node picks the best of
    ``shapelets_per_node`` random candidate shapelets, with the threshold that
    maximizes information gain over the node's sorted distances.  Growth stops
    on pure or sub-2-sample nodes.  Per-tree RNG streams are derived from
    (seed, tree index), so training is reproducible regardless of tree
    construction order.
    """
    if config is None:
        config = ForestConfig()
    if not dataset:
        raise TrainingError("empty dataset")

    series_values = [as_values(s) for s, _ in dataset]
    for i, values in enumerate(series_values):
        if values.size < 1 or not np.all(np.isfinite(values)):
            raise TrainingError(f"series {i} is empty or contains non-finite values")

    raw_labels = [str(label) for _, label in dataset]
    labels = tuple(sorted(set(raw_labels)))
    if len(labels) < 2:
        raise TrainingError("training needs at least two distinct labels")
    label_index = {label: i for i, label in enumerate(labels)}
    y = np.array([label_index[label] for label in raw_labels], dtype=np.int64)

    n = len(series_values)
    streams = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    trees = []
    for tree_seed in streams:
        rng = np.random.default_rng(tree_seed)
        bootstrap = rng.integers(0, n, size=n)
        grower = _TreeGrower(series_values, y, labels, config, rng)
        trees.append(ShapeletTree(grower.grow(bootstrap)))
    return ShapeletForest(trees, labels, config)
