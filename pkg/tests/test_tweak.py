import numpy as np
import pytest

from shapetweak import (
    GT,
    LEQ,
    ContractViolation,
    ForestConfig,
    Leaf,
    LockedRegions,
    PathCondition,
    Shapelet,
    ShapeletForest,
    ShapeletTree,
    Split,
    TimeSeries,
    TweakConfig,
    euclidean_distance,
    make_planted_dataset,
    train,
    transform_subsequence,
    tweak_irreversible,
    tweak_nn,
    tweak_reversible,
    tweak_reversible_pruned,
)

from conftest import route_forest


class TestTransformSubsequence:
    def test_three_four_five_projection(self):
        cond = PathCondition(Shapelet([0.0, 0.0]), 2.0, LEQ)
        out = transform_subsequence([3.0, 4.0], cond, epsilon=1.0)
        assert out.values == pytest.approx([0.6, 0.8], abs=1e-12)
        assert not out.clamped

    def test_epsilon_to_zero_limit_reaches_circumference(self):
        cond = PathCondition(Shapelet([1.0, 1.0]), 3.0, GT)
        out = transform_subsequence([4.0, 5.0], cond, epsilon=1e-12)
        radius = euclidean_distance(out.values, cond.shapelet.values)
        assert radius == pytest.approx(3.0, abs=1e-9)

    def test_random_calls_hit_exact_radius(self):
        rng = np.random.default_rng(31)
        for _ in range(500):
            length = int(rng.integers(1, 12))
            center = rng.normal(size=length) * 3
            window = rng.normal(size=length) * 3
            theta = float(rng.uniform(0, 4))
            direction = GT if rng.random() < 0.5 else LEQ
            epsilon = float(rng.uniform(1e-6, theta)) if direction == LEQ and theta > 0 else float(
                rng.uniform(1e-6, 3)
            )
            if direction == LEQ and theta == 0:
                continue
            cond = PathCondition(Shapelet(center), theta, direction)
            out = transform_subsequence(window, cond, epsilon)
            target = theta + epsilon * direction
            measured = euclidean_distance(out.values, center)
            assert abs(measured - target) <= 1e-9 * max(1.0, theta)

    def test_window_equal_to_shapelet_uses_basis_fallback(self):
        cond = PathCondition(Shapelet([2.0, 2.0, 2.0]), 1.0, GT)
        out = transform_subsequence([2.0, 2.0, 2.0], cond, epsilon=0.5)
        assert out.values == pytest.approx([3.5, 2.0, 2.0])
        # deterministic: same call, same result
        again = transform_subsequence([2.0, 2.0, 2.0], cond, epsilon=0.5)
        assert np.array_equal(out.values, again.values)

    def test_negative_target_radius_clamps_to_center(self):
        cond = PathCondition(Shapelet([0.0, 0.0]), 0.5, LEQ)
        out = transform_subsequence([3.0, 4.0], cond, epsilon=2.0)
        assert out.clamped
        assert out.values == pytest.approx([0.0, 0.0])

    def test_rejects_bad_epsilon_and_length(self):
        cond = PathCondition(Shapelet([0.0, 0.0]), 1.0, LEQ)
        with pytest.raises(ContractViolation):
            transform_subsequence([1.0, 2.0], cond, epsilon=0.0)
        with pytest.raises(ContractViolation):
            transform_subsequence([1.0], cond, epsilon=1.0)


class TestLockedRegions:
    def test_merges_overlapping_and_adjacent(self):
        locks = LockedRegions()
        locks.add(0, 3)
        locks.add(5, 8)
        locks.add(3, 5)  # adjacent to both
        assert locks.intervals == ((0, 8),)

    def test_overlap_and_membership(self):
        locks = LockedRegions()
        locks.add(2, 5)
        assert locks.overlaps(4, 6)
        assert not locks.overlaps(5, 7)  # half-open
        assert 2 in locks and 4 in locks and 5 not in locks

    def test_rejects_empty_interval(self):
        with pytest.raises(ContractViolation):
            LockedRegions().add(3, 3)


def one_path_forest(shapelet, theta, direction, label_in="want", label_out="other"):
    """Single tree whose <= branch carries label_in and > branch label_out."""
    left, right = Leaf(label_in), Leaf(label_out)
    if direction == GT:
        left, right = right, left
    tree = ShapeletTree(Split(Shapelet(shapelet), theta, left, right))
    labels = sorted({label_in, label_out})
    return ShapeletForest([tree], labels, ForestConfig(n_trees=1))


class TestTweakReversible:
    def test_precondition_series_already_desired(self):
        forest = one_path_forest([0.0, 0.0], 1.0, LEQ)
        with pytest.raises(ContractViolation):
            tweak_reversible(forest, TimeSeries([0.0, 0.0, 0.0]), "want")

    def test_unknown_desired_label(self):
        forest = one_path_forest([0.0, 0.0], 1.0, LEQ)
        with pytest.raises(ContractViolation):
            tweak_reversible(forest, TimeSeries([9.0, 9.0]), "bogus")

    def test_single_leq_condition_decrease(self):
        forest = one_path_forest([0.0, 0.0], 1.0, LEQ)
        series = TimeSeries([6.0, 8.0, 20.0])
        result = tweak_reversible(forest, series, "want", TweakConfig(epsilon=0.5))
        assert result.success
        assert forest.predict(result.transformed) == "want"
        assert route_forest(forest, result.transformed.values) == "want"
        # one decrease edit, landing at radius theta - epsilon
        assert len(result.edits) == 1
        edit = result.edits[0]
        window = result.transformed.values[edit.start : edit.start + edit.length]
        assert euclidean_distance(window, [0.0, 0.0]) == pytest.approx(0.5, rel=1e-9)
        assert result.cost == pytest.approx(
            euclidean_distance(series, result.transformed), rel=1e-12
        )

    def test_single_gt_condition_increase_loop_clears_all_matches(self):
        forest = one_path_forest([0.0], 2.0, GT, label_in="near")
        series = TimeSeries([0.0, 0.0, 0.0, 0.0])
        result = tweak_reversible(forest, series, "other", TweakConfig(epsilon=1.0))
        assert result.success
        assert len(result.edits) == 4  # every window had to be pushed out
        assert np.all(np.abs(result.transformed.values) > 2.0)

    def test_increase_loop_iteration_cap_fails_candidate(self):
        forest = one_path_forest([0.0], 2.0, GT, label_in="near")
        series = TimeSeries([0.0, 0.0, 0.0, 0.0])
        result = tweak_reversible(
            forest, series, "other", TweakConfig(epsilon=1.0, max_increase_iterations=2)
        )
        assert not result.success
        assert result.transformed == series

    def test_no_paths_for_desired_label(self):
        tree = ShapeletTree(Split(Shapelet([0.0]), 1.0, Leaf("a"), Leaf("a")))
        single_leaf = ShapeletTree(Leaf("b"))
        forest = ShapeletForest([tree, single_leaf], ["a", "b"], ForestConfig(n_trees=2))
        series = TimeSeries([9.0, 9.0])
        if forest.predict(series) != "b":
            result = tweak_reversible(forest, series, "b")
            assert not result.success
            assert "no decision paths" in result.note

    def test_failure_returns_original_series(self, small_forest_and_data):
        forest, _ = small_forest_and_data
        series = TimeSeries(np.zeros(32))
        desired = next(l for l in forest.labels if l != forest.predict(series))
        result = tweak_reversible(
            forest, series, desired, TweakConfig(max_increase_iterations=1)
        )
        if not result.success:
            assert result.transformed == series
            assert result.cost == 0.0


def tweakable_instances(forest, data, n, seed=0):
    """(values, desired) pairs whose current prediction differs from desired."""
    rng = np.random.default_rng(seed)
    out = []
    for values, _ in data:
        predicted = forest.predict(values)
        others = [l for l in forest.labels if l != predicted]
        out.append((values, others[int(rng.integers(len(others)))]))
        if len(out) == n:
            break
    return out


class TestPrunedEquivalence:
    def test_pruned_matches_unpruned_on_random_instances(self, small_forest_and_data):
        forest, data = small_forest_and_data
        for values, desired in tweakable_instances(forest, data, 20):
            plain = tweak_reversible(forest, values, desired)
            pruned = tweak_reversible_pruned(forest, values, desired)
            assert plain.success == pruned.success
            assert plain.cost == pruned.cost
            assert np.array_equal(plain.transformed.values, pruned.transformed.values)

    def test_pruned_fraction_definition(self, small_forest_and_data):
        forest, data = small_forest_and_data
        values, desired = tweakable_instances(forest, data, 1)[0]
        result = tweak_reversible_pruned(forest, values, desired)
        assert result.pruned_fraction is not None
        assert 0.0 <= result.pruned_fraction <= 1.0
        if result.success:
            viable = result.n_candidates  # no aborts expected without a tiny cap
            assert result.pruned_fraction == pytest.approx(
                (viable - result.n_predictions) / viable
            )


class TestTweakIrreversible:
    def test_equals_reversible_when_windows_do_not_overlap(self):
        inner = Split(Shapelet([-5.0, -5.0]), 0.5, Leaf("want"), Leaf("other"))
        tree = ShapeletTree(Split(Shapelet([5.0, 5.0]), 0.5, inner, Leaf("other")))
        forest = ShapeletForest([tree], ["other", "want"], ForestConfig(n_trees=1))
        series = TimeSeries(np.zeros(8))
        rt = tweak_reversible(forest, series, "want")
        irt = tweak_irreversible(forest, series, "want")
        assert rt.success and irt.success
        assert np.array_equal(rt.transformed.values, irt.transformed.values)
        assert rt.cost == irt.cost
        # the two edits touched disjoint windows
        spans = [(e.start, e.start + e.length) for e in irt.edits]
        assert len(spans) == 2 and spans[0][1] <= spans[1][0] or spans[1][1] <= spans[0][0]

    def test_cost_trace_is_monotone(self, small_forest_and_data):
        forest, data = small_forest_and_data
        config = TweakConfig(record_cost_traces=True)
        for values, desired in tweakable_instances(forest, data, 10):
            result = tweak_irreversible(forest, values, desired, config)
            assert result.cost_traces is not None
            for trace in result.cost_traces:
                assert all(a <= b for a, b in zip(trace, trace[1:]))

    def test_early_abandon_matches_exhaustive(self, small_forest_and_data):
        forest, data = small_forest_and_data
        for values, desired in tweakable_instances(forest, data, 20):
            eager = tweak_irreversible(forest, values, desired, early_abandon=True)
            full = tweak_irreversible(forest, values, desired, early_abandon=False)
            assert eager.success == full.success
            assert eager.cost == full.cost
            assert np.array_equal(eager.transformed.values, full.transformed.values)

    def test_abandoned_fraction_bounds(self, small_forest_and_data):
        forest, data = small_forest_and_data
        values, desired = tweakable_instances(forest, data, 1)[0]
        result = tweak_irreversible(forest, values, desired)
        assert result.abandoned_fraction is not None
        assert 0.0 <= result.abandoned_fraction <= 1.0

    def test_all_paths_abort_on_locking(self):
        # one path needing two edits of the only available window
        inner = Split(Shapelet([9.0, 9.0]), 0.5, Leaf("want"), Leaf("other"))
        tree = ShapeletTree(Split(Shapelet([0.0, 0.0]), 0.5, inner, Leaf("other")))
        forest = ShapeletForest([tree], ["other", "want"], ForestConfig(n_trees=1))
        series = TimeSeries([5.0, 5.0])  # a single window, wanted by both conditions
        result = tweak_irreversible(forest, series, "want")
        assert not result.success
        assert result.transformed == series

    def test_success_reprediction_soundness(self, small_forest_and_data):
        forest, data = small_forest_and_data
        for values, desired in tweakable_instances(forest, data, 15, seed=5):
            for fn in (tweak_reversible_pruned, tweak_irreversible):
                result = fn(forest, values, desired)
                if result.success:
                    assert forest.predict(result.transformed) == desired


class TestTweakNN:
    def test_series_in_training_set_costs_zero(self):
        series = np.array([1.0, 2.0, 3.0])
        training = [(series, "t"), (np.zeros(3), "t")]
        result = tweak_nn(series, "t", training)
        assert result.cost == 0.0
        assert np.array_equal(result.transformed.values, series)

    def test_picks_nearest_of_two(self):
        series = np.zeros(2)
        near = np.array([3.0, 0.0])
        far = np.array([5.0, 0.0])
        result = tweak_nn(series, "t", [(far, "t"), (near, "t")])
        assert result.cost == 3.0
        assert np.array_equal(result.transformed.values, near)

    def test_ignores_other_labels_and_lengths(self):
        series = np.zeros(2)
        result = tweak_nn(
            series, "t",
            [(np.array([1.0, 0.0]), "u"), (np.array([1.0]), "t"), (np.array([4.0, 0.0]), "t")],
        )
        assert result.cost == 4.0

    def test_no_candidate_raises(self):
        with pytest.raises(ContractViolation):
            tweak_nn(np.zeros(2), "t", [(np.zeros(3), "t"), (np.zeros(2), "u")])

    def test_success_checked_against_forest(self):
        forest = one_path_forest([0.0, 0.0], 1.0, LEQ)
        series = np.array([9.0, 9.0, 9.0])
        training = [(np.array([0.0, 0.1, 5.0]), "want")]
        checked = tweak_nn(series, "want", training, forest=forest)
        assert checked.success
        unchecked = tweak_nn(series, "want", training)
        assert not unchecked.success


class TestMultiClass:
    def test_tweak_toward_any_other_label(self):
        rng = np.random.default_rng(12)
        data = []
        for label, level in (("a", 0.0), ("b", 4.0), ("c", -4.0)):
            data += [(rng.normal(level, 0.2, size=12), label) for _ in range(8)]
        forest = train(data, ForestConfig(n_trees=7, shapelets_per_node=6, seed=1))
        series = data[0][0]
        predicted = forest.predict(series)
        for desired in forest.labels:
            if desired == predicted:
                continue
            result = tweak_reversible_pruned(forest, series, desired)
            if result.success:
                assert forest.predict(result.transformed) == desired
