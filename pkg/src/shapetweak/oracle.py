"""Exhaustive optimality oracle for tiny binary tweaking instances.

The greedy tweakers are approximate; finding the true minimum number of
changes is intractable in general.  For desk-scale instances this module
offers the exact answer: a toy forest whose nodes test single positions of a
binary series, an exhaustive search over flip sets, and a builder for
hitting-set-style instances (one chain tree per set, voting "hit" iff any of
its positions carries a 1).

To compare the exact minimum with the greedy algorithms, a toy instance can
be encoded as a real shapelet forest over a real-valued series: position i
is carried at value SPACING*i + bit, and each position test becomes a
length-1 shapelet centered on its band.  Bands are far enough apart that
greedy edits (which move values by at most threshold + epsilon) can never
cross into another position's band, so the encoded forest and the toy forest
agree on everything the greedy tweakers can produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from .errors import ContractViolation
from .forest import ForestConfig, Leaf, ShapeletForest, ShapeletTree, Split
from .series import Shapelet, TimeSeries

__all__ = [
    "MAX_ORACLE_LENGTH",
    "BAND_SPACING",
    "BAND_TOLERANCE",
    "ToyLeaf",
    "ToySplit",
    "ToyForest",
    "hitting_set_forest",
    "brute_force_min_changes",
    "encode_instance",
    "decode_bits",
]

MAX_ORACLE_LENGTH = 20

# Encoding geometry: with epsilon <= 6 every greedy edit stays within
# BAND_SPACING/2 of its own band center, so bands never collide.
BAND_SPACING = 8.0
BAND_TOLERANCE = 0.25


@dataclass(frozen=True)
class ToyLeaf:
    label: str


@dataclass(frozen=True)
class ToySplit:
    """Tests whether the series carries ``value`` at ``position``."""

    position: int
    value: int
    if_true: "ToyNode"
    if_false: "ToyNode"


ToyNode = Union[ToyLeaf, ToySplit]


@dataclass(frozen=True)
class ToyForest:
    """Majority vote over position-test trees; ties go to the first label."""

    trees: tuple[ToyNode, ...]
    labels: tuple[str, ...]

    def predict(self, bits: Sequence[int]) -> str:
        votes = {label: 0 for label in self.labels}
        for tree in self.trees:
            node = tree
            while isinstance(node, ToySplit):
                node = node.if_true if bits[node.position] == node.value else node.if_false
            votes[node.label] += 1
        return max(self.labels, key=lambda label: votes[label])


def hitting_set_forest(n_elements: int, sets: Sequence[Sequence[int]],
                       hit_label: str = "1", miss_label: str = "0") -> ToyForest:
    """One chain tree per set: predicts ``hit_label`` iff any set position is 1."""
    if n_elements < 1:
        raise ContractViolation("need at least one element")
    trees = []
    for subset in sets:
        positions = sorted(set(subset))
        if not positions:
            raise ContractViolation("sets must be non-empty")
        if positions[0] < 0 or positions[-1] >= n_elements:
            raise ContractViolation(f"set {subset} has positions outside [0, {n_elements})")
        node: ToyNode = ToyLeaf(miss_label)
        for position in reversed(positions):
            node = ToySplit(position, 1, ToyLeaf(hit_label), node)
        trees.append(node)
    return ToyForest(tuple(trees), tuple(sorted({hit_label, miss_label})))


def brute_force_min_changes(forest: ToyForest, bits: Sequence[int], desired_label: str,
                            budget: int) -> tuple[int, ...] | None:
    """Smallest flip set (by size, then lexicographic) reaching the desired
    label, or None when no set of at most ``budget`` positions works.

    Exhaustive over all position subsets, so the series length is hard-capped
    at MAX_ORACLE_LENGTH.
    """
    bits = [int(b) for b in bits]
    if len(bits) > MAX_ORACLE_LENGTH:
        raise ContractViolation(
            f"series of length {len(bits)} exceeds the oracle cap of {MAX_ORACLE_LENGTH};"
            " the search is exponential in length"
        )
    if any(b not in (0, 1) for b in bits):
        raise ContractViolation("series must be binary")
    if desired_label not in forest.labels:
        raise ContractViolation(f"unknown label {desired_label!r}")
    budget = min(int(budget), len(bits))
    if budget < 0:
        raise ContractViolation("budget must be >= 0")

    for size in range(budget + 1):
        for flips in combinations(range(len(bits)), size):
            flipped = list(bits)
            for position in flips:
                flipped[position] = 1 - flipped[position]
            if forest.predict(flipped) == desired_label:
                return flips
    return None


def _encode_node(node: ToyNode) -> Leaf | Split:
    if isinstance(node, ToyLeaf):
        return Leaf(node.label)
    center = BAND_SPACING * node.position + node.value
    return Split(
        shapelet=Shapelet([center]),
        threshold=BAND_TOLERANCE,
        left=_encode_node(node.if_true),  # <= branch: the band matched
        right=_encode_node(node.if_false),
    )


def encode_instance(forest: ToyForest, bits: Sequence[int]) -> tuple[ShapeletForest, TimeSeries]:
    """Render a toy instance as a real shapelet forest plus encoded series,
    so the greedy tweakers can run on it."""
    trees = [ShapeletTree(_encode_node(tree)) for tree in forest.trees]
    config = ForestConfig(
        n_trees=len(trees), shapelets_per_node=1,
        min_shapelet_length=1, max_shapelet_length=1, seed=0,
    )
    encoded = ShapeletForest(trees, forest.labels, config)
    values = np.array([BAND_SPACING * i + int(b) for i, b in enumerate(bits)], dtype=np.float64)
    return encoded, TimeSeries(values)


def decode_bits(series) -> list[int]:
    """Read the bit per position back out of an encoded (possibly tweaked) series."""
    values = np.asarray(series.values if isinstance(series, TimeSeries) else series)
    out = []
    for i, value in enumerate(values):
        out.append(1 if abs(value - (BAND_SPACING * i + 1)) <= BAND_TOLERANCE else 0)
    return out
