import math

import numpy as np
import pytest

from shapetweak import (
    ContractViolation,
    MatchLocation,
    Shapelet,
    Subsequence,
    TimeSeries,
    euclidean_distance,
    matches_within,
    subsequence_distance,
)

from conftest import brute_subsequence_distance


class TestTimeSeries:
    def test_values_are_immutable(self):
        ts = TimeSeries([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            ts.values[0] = 5.0
        with pytest.raises(AttributeError):
            ts.values = np.zeros(3)

    def test_construction_copies_input(self):
        source = np.array([1.0, 2.0])
        ts = TimeSeries(source)
        source[0] = 99.0
        assert ts.values[0] == 1.0

    @pytest.mark.parametrize("bad", [[], [np.nan], [1.0, np.inf], [[1.0, 2.0]]])
    def test_rejects_bad_values(self, bad):
        with pytest.raises(ContractViolation):
            TimeSeries(bad)

    def test_subsequence_view_and_bounds(self):
        ts = TimeSeries([0.0, 1.0, 2.0, 3.0])
        sub = ts.subsequence(1, 2)
        assert list(sub.values) == [1.0, 2.0]
        assert sub.materialize() == Shapelet([1.0, 2.0])
        with pytest.raises(ContractViolation):
            ts.subsequence(3, 2)
        with pytest.raises(ContractViolation):
            Subsequence(ts, -1, 2)


class TestEuclideanDistance:
    def test_identity_case(self):
        assert euclidean_distance([1.5, -2.0, 0.0], [1.5, -2.0, 0.0]) == 0.0

    def test_three_four_five(self):
        assert euclidean_distance([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_matches_loop_oracle_on_random_vectors(self):
        # frozen from a direct summation loop over rng(20240613) normals
        rng = np.random.default_rng(20240613)
        a = rng.normal(size=64)
        b = rng.normal(size=64)
        assert euclidean_distance(a, b) == pytest.approx(11.433173173105763, abs=0, rel=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ContractViolation):
            euclidean_distance([1.0, 2.0], [1.0])

    def test_metric_properties_on_random_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = int(rng.integers(1, 20))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            d = euclidean_distance(a, b)
            assert d >= 0.0
            assert d == euclidean_distance(b, a)
            assert euclidean_distance(a, a) == 0.0
            if d == 0.0:
                assert np.array_equal(a, b)


class TestSubsequenceDistance:
    def test_exact_match_window(self):
        loc = subsequence_distance(Shapelet([1.0, 2.0]), TimeSeries([0.0, 1.0, 2.0, 3.0]))
        assert loc == MatchLocation(start=1, distance=0.0)

    def test_whole_series_single_window(self):
        loc = subsequence_distance(Shapelet([4.0, 5.0]), TimeSeries([4.0, 5.0]))
        assert loc == MatchLocation(start=0, distance=0.0)

    def test_against_exhaustive_window_scan(self):
        # frozen from the loop oracle over the three windows of [0,1,2,3]
        loc = subsequence_distance(Shapelet([5.0, 5.0]), TimeSeries([0.0, 1.0, 2.0, 3.0]))
        assert loc.start == 2
        assert loc.distance == pytest.approx(3.605551275463989, abs=0, rel=1e-15)

    def test_shapelet_longer_than_series(self):
        with pytest.raises(ContractViolation):
            subsequence_distance(Shapelet([1.0, 2.0, 3.0]), TimeSeries([1.0, 2.0]))

    def test_random_inputs_match_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            m = int(rng.integers(2, 30))
            l = int(rng.integers(1, m + 1))
            series = rng.normal(size=m)
            shapelet = rng.normal(size=l)
            start, dist = brute_subsequence_distance(shapelet, series)
            loc = subsequence_distance(shapelet, series)
            assert loc.start == start
            assert loc.distance == pytest.approx(dist, rel=1e-12)

    def test_tie_broken_by_smallest_start(self):
        loc = subsequence_distance(Shapelet([0.0]), TimeSeries([5.0, 1.0, 1.0, 5.0]))
        assert loc.start == 1

    def test_window_minimality_exhaustive(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            series = rng.normal(size=12)
            shapelet = rng.normal(size=4)
            best = subsequence_distance(shapelet, series).distance
            for start in range(9):
                window_dist = euclidean_distance(shapelet, series[start : start + 4])
                assert best <= window_dist + 1e-12

    def test_appending_never_increases_distance(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            series = rng.normal(size=10)
            shapelet = rng.normal(size=3)
            base = subsequence_distance(shapelet, series).distance
            extended = np.concatenate([series, rng.normal(size=4)])
            assert subsequence_distance(shapelet, extended).distance <= base


class TestMatchesWithin:
    def test_below_minimum_gives_empty(self):
        series = TimeSeries([0.0, 1.0, 2.0, 3.0])
        best = subsequence_distance(Shapelet([5.0, 5.0]), series).distance
        assert matches_within(Shapelet([5.0, 5.0]), series, best - 1e-9) == []

    def test_huge_theta_gives_all_windows(self):
        series = TimeSeries([0.0, 1.0, 2.0, 3.0])
        hits = matches_within(Shapelet([5.0, 5.0]), series, 1e12)
        assert [h.start for h in hits] == [0, 1, 2]

    def test_exhaustive_scan_example(self):
        hits = matches_within(Shapelet([0.0, 0.0]), TimeSeries([0.0, 0.0, 5.0, 0.0, 0.0]), 0.1)
        assert [h.start for h in hits] == [0, 3]
        assert all(h.distance == 0.0 for h in hits)

    def test_theta_at_best_distance_contains_best_start(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            series = rng.normal(size=15)
            shapelet = rng.normal(size=4)
            best = subsequence_distance(shapelet, series)
            hits = matches_within(shapelet, series, best.distance)
            assert best.start in [h.start for h in hits]
