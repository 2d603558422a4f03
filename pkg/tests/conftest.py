import math

import numpy as np
import pytest

from shapetweak import ForestConfig, make_planted_dataset, train


def brute_subsequence_distance(shapelet_values, series_values):
    """Loop-based window scan, independent of the library's vectorized path."""
    shapelet_values = list(shapelet_values)
    series_values = list(series_values)
    length = len(shapelet_values)
    best_start, best_dist = None, math.inf
    for start in range(len(series_values) - length + 1):
        total = 0.0
        for i in range(length):
            diff = series_values[start + i] - shapelet_values[i]
            total += diff * diff
        dist = math.sqrt(total)
        if dist < best_dist:
            best_start, best_dist = start, dist
    return best_start, best_dist


def route_tree(tree, values):
    """Walk a tree with the brute-force distance; returns the leaf label."""
    from shapetweak.forest import Split

    node = tree.root
    while isinstance(node, Split):
        _, dist = brute_subsequence_distance(node.shapelet.values, values)
        node = node.left if dist <= node.threshold else node.right
    return node.label


def route_forest(forest, values):
    """Majority vote over brute-force tree routings, ties to the first label."""
    votes = {label: 0 for label in forest.labels}
    for tree in forest.trees:
        votes[route_tree(tree, values)] += 1
    return max(forest.labels, key=lambda label: votes[label])


@pytest.fixture(scope="session")
def small_forest_and_data():
    """A small trained forest on separable data, reused across tests."""
    data = make_planted_dataset(20, length=32, seed=11, kind="two_bumps")
    config = ForestConfig(
        n_trees=5, shapelets_per_node=8, min_shapelet_length=3,
        max_shapelet_length=12, seed=7,
    )
    return train(data, config), data
