"""Minimum-cost series tweaking against a shapelet forest.

Given a series the forest classifies as one label and a desired other label,
every decision path carrying the desired label proposes a candidate edit of
the series: unsatisfied conditions are fixed by projecting the best-matching
window onto the threshold sphere around the condition's shapelet, slightly
inside it (<= branches) or outside it (> branches).  The cheapest candidate
the forest actually re-classifies as desired wins.

Two search regimes are provided: reversible tweaking, where later edits may
overwrite earlier ones, with an optional prediction-ordering optimization
that sorts candidates by cost and stops at the first success; and
irreversible tweaking, where edited regions are locked, making the candidate
cost monotone and enabling early abandoning against the best cost so far.
A 1-nearest-neighbor baseline and a brute-force optimality oracle for tiny
binary instances round out the module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ContractViolation
from .forest import GT, DecisionPath, PathCondition, ShapeletForest, condition_test
from .series import MatchLocation, TimeSeries, as_values, distance_profile, euclidean_distance

__all__ = [
    "TweakConfig",
    "LockedRegions",
    "Edit",
    "TweakResult",
    "TransformedWindow",
    "transform_subsequence",
    "tweak_reversible",
    "tweak_reversible_pruned",
    "tweak_irreversible",
    "tweak_nn",
]


@dataclass(frozen=True)
class TweakConfig:
    """Knobs shared by the tweaking algorithms.

    ``epsilon`` is the transformation strength: edited windows land at
    distance threshold - epsilon (<= branches) or threshold + epsilon
    (> branches) from the condition shapelet.  ``max_increase_iterations``
    caps the increase-distance loop; ``None`` means 100x the series length.
    """

    epsilon: float = 1.0
    max_increase_iterations: int | None = None
    cost_fn: Callable = euclidean_distance
    record_cost_traces: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ContractViolation("epsilon must be > 0")
        if self.max_increase_iterations is not None and self.max_increase_iterations < 1:
            raise ContractViolation("max_increase_iterations must be >= 1")


class LockedRegions:
    """Half-open index intervals already edited and closed to further edits.

    Intervals are kept sorted and merged when they overlap or touch, so
    membership and overlap queries are exact.
    """

    __slots__ = ("_intervals",)

    def __init__(self):
        self._intervals: list[tuple[int, int]] = []

    @property
    def intervals(self) -> tuple[tuple[int, int], ...]:
        return tuple(self._intervals)

    def add(self, start: int, stop: int) -> None:
        if stop <= start:
            raise ContractViolation("empty interval")
        merged_start, merged_stop = start, stop
        kept = []
        for a, b in self._intervals:
            if b < merged_start or a > merged_stop:
                kept.append((a, b))
            else:
                merged_start = min(merged_start, a)
                merged_stop = max(merged_stop, b)
        kept.append((merged_start, merged_stop))
        kept.sort()
        self._intervals = kept

    def overlaps(self, start: int, stop: int) -> bool:
        return any(start < b and stop > a for a, b in self._intervals)

    def __contains__(self, index: int) -> bool:
        return any(a <= index < b for a, b in self._intervals)

    def __len__(self) -> int:
        return len(self._intervals)


class Edit(NamedTuple):
    """One applied window transformation."""

    tree_index: int
    path_index: int
    condition_index: int
    start: int
    length: int


class TransformedWindow(NamedTuple):
    values: np.ndarray
    clamped: bool


@dataclass(frozen=True)
class TweakResult:
    """Outcome of one tweaking call.

    ``success`` is only ever set after re-predicting the transformed series
    with the forest; it is never inferred from path logic.  ``cost`` is the
    whole-series Euclidean distance to the original.
    """

    transformed: TimeSeries
    cost: float
    success: bool
    edits: tuple[Edit, ...] = ()
    candidate_index: tuple[int, int] | None = None
    n_candidates: int = 0
    n_predictions: int = 0
    pruned_fraction: float | None = None
    abandoned_fraction: float | None = None
    note: str = ""
    cost_traces: tuple[tuple[float, ...], ...] | None = None


def transform_subsequence(matched, condition: PathCondition, epsilon: float) -> TransformedWindow:
    """Project a matched window onto the condition's threshold sphere.

    The result lies on the ray from the condition shapelet (the sphere
    center) through the original window, at radius threshold + epsilon *
    direction: inside the sphere for <= conditions, outside for > ones.
    This is the minimum-cost point at the target radius.  A window identical
    to the shapelet has no ray; it is pushed along the first coordinate axis
    instead.  A negative target radius (epsilon > threshold on a <= branch)
    clamps to zero and flags the transform as clamped.
    """
    if not epsilon > 0:
        raise ContractViolation("epsilon must be > 0")
    window = as_values(matched)
    center = condition.shapelet.values
    if window.shape != center.shape:
        raise ContractViolation(
            f"window length {window.size} does not match shapelet length {center.size}"
        )
    target = condition.threshold + epsilon * condition.direction
    clamped = target < 0
    if clamped:
        target = 0.0
    offset = window - center
    norm = float(np.sqrt(np.sum(offset**2)))
    if norm == 0.0:
        direction = np.zeros_like(center)
        direction[0] = 1.0
    else:
        direction = offset / norm
    return TransformedWindow(values=center + direction * target, clamped=clamped)


def _best_match(shapelet_values: np.ndarray, series_values: np.ndarray,
                locks: LockedRegions | None) -> MatchLocation | None:
    """Best window by distance, skipping lock-overlapping windows; None if all locked."""
    profile = distance_profile(shapelet_values, series_values)
    if locks is not None and len(locks):
        length = shapelet_values.size
        available = np.ones(profile.size, dtype=bool)
        for a, b in locks.intervals:
            lo = max(0, a - length + 1)
            hi = min(profile.size, b)
            if lo < hi:
                available[lo:hi] = False
        if not available.any():
            return None
        profile = np.where(available, profile, np.inf)
    start = int(np.argmin(profile))
    return MatchLocation(start, float(profile[start]))


class _Candidate(NamedTuple):
    path: DecisionPath
    values: np.ndarray | None
    cost: float | None
    edits: tuple[Edit, ...]
    aborted: bool
    abandoned: bool
    cost_trace: tuple[float, ...]


def _apply_path(original: np.ndarray, path: DecisionPath, config: TweakConfig,
                *, lock: bool, abandon_at: float | None, trace: bool) -> _Candidate:
    """Run one candidate path against a fresh copy of the original series."""
    working = original.copy()
    locks = LockedRegions() if lock else None
    edits: list[Edit] = []
    cost_trace: list[float] = []
    cap = config.max_increase_iterations
    if cap is None:
        cap = 100 * original.size
    need_partial = trace or abandon_at is not None

    def register_edit(cond_index: int, start: int, length: int) -> bool:
        """Record bookkeeping for one applied edit; True means keep going."""
        edits.append(Edit(path.tree_index, path.path_index, cond_index, start, length))
        if locks is not None:
            locks.add(start, start + length)
        if need_partial:
            partial = config.cost_fn(original, working)
            if trace:
                cost_trace.append(partial)
            if abandon_at is not None and partial >= abandon_at:
                return False
        return True

    for cond_index, condition in enumerate(path.conditions):
        if condition_test(working, condition):
            continue
        shapelet_values = condition.shapelet.values
        length = shapelet_values.size
        if condition.direction == GT:
            # increase distance: push every reachable sub-threshold match out
            iterations = 0
            while True:
                loc = _best_match(shapelet_values, working, locks)
                if loc is None:
                    return _Candidate(path, None, None, tuple(edits), True, False, tuple(cost_trace))
                if loc.distance > condition.threshold:
                    break
                iterations += 1
                if iterations > cap:
                    return _Candidate(path, None, None, tuple(edits), True, False, tuple(cost_trace))
                new_window = transform_subsequence(
                    working[loc.start : loc.start + length], condition, config.epsilon
                ).values
                working[loc.start : loc.start + length] = new_window
                if not register_edit(cond_index, loc.start, length):
                    return _Candidate(path, None, None, tuple(edits), False, True, tuple(cost_trace))
        else:
            # decrease distance: pull the single best match inside the threshold
            loc = _best_match(shapelet_values, working, locks)
            if loc is None:
                return _Candidate(path, None, None, tuple(edits), True, False, tuple(cost_trace))
            new_window = transform_subsequence(
                working[loc.start : loc.start + length], condition, config.epsilon
            ).values
            working[loc.start : loc.start + length] = new_window
            if not register_edit(cond_index, loc.start, length):
                return _Candidate(path, None, None, tuple(edits), False, True, tuple(cost_trace))

    cost = float(config.cost_fn(original, working))
    return _Candidate(path, working, cost, tuple(edits), False, False, tuple(cost_trace))


def _check_preconditions(forest: ShapeletForest, series, desired_label: str) -> np.ndarray:
    values = as_values(series)
    if desired_label not in forest.labels:
        raise ContractViolation(
            f"desired label {desired_label!r} not in forest labels {forest.labels}"
        )
    if forest.predict(values) == desired_label:
        raise ContractViolation("series is already classified as the desired label")
    return values


def _failure(values: np.ndarray, note: str, n_candidates: int = 0, n_predictions: int = 0,
             pruned: float | None = None, abandoned: float | None = None,
             traces: tuple | None = None) -> TweakResult:
    return TweakResult(
        transformed=TimeSeries(values),
        cost=0.0,
        success=False,
        edits=(),
        candidate_index=None,
        n_candidates=n_candidates,
        n_predictions=n_predictions,
        pruned_fraction=pruned,
        abandoned_fraction=abandoned,
        note=note,
        cost_traces=traces,
    )


def _result_from(candidate: _Candidate, n_candidates: int, n_predictions: int,
                 pruned: float | None = None, abandoned: float | None = None,
                 traces: tuple | None = None) -> TweakResult:
    return TweakResult(
        transformed=TimeSeries(candidate.values),
        cost=candidate.cost,
        success=True,
        edits=candidate.edits,
        candidate_index=(candidate.path.tree_index, candidate.path.path_index),
        n_candidates=n_candidates,
        n_predictions=n_predictions,
        pruned_fraction=pruned,
        abandoned_fraction=abandoned,
        cost_traces=traces,
    )


def tweak_reversible(forest: ShapeletForest, series, desired_label: str,
                     config: TweakConfig | None = None) -> TweakResult:
    """Greedy reversible tweaking: every desired-label path proposes a candidate.

    Each candidate starts from a fresh copy of the original series and applies
    its path's conditions in order; later edits may overwrite earlier ones.
    The cheapest candidate that the forest re-classifies as the desired label
    is returned; with no successful candidate the original series comes back
    with ``success=False``.
    """
    config = config or TweakConfig()
    values = _check_preconditions(forest, series, desired_label)
    paths = forest.extract_paths(desired_label)
    if not paths:
        return _failure(values, f"no decision paths labeled {desired_label!r}")

    best: _Candidate | None = None
    n_predictions = 0
    for path in paths:
        candidate = _apply_path(values, path, config, lock=False, abandon_at=None, trace=False)
        if candidate.aborted:
            continue
        if best is not None and candidate.cost >= best.cost:
            continue
        n_predictions += 1
        if forest.predict(candidate.values) == desired_label:
            best = candidate
    if best is None:
        return _failure(values, "no successful candidate", len(paths), n_predictions)
    return _result_from(best, len(paths), n_predictions)


def tweak_reversible_pruned(forest: ShapeletForest, series, desired_label: str,
                            config: TweakConfig | None = None) -> TweakResult:
    """Reversible tweaking with prediction ordering.

    All candidate transformations are computed first and sorted by ascending
    cost; forest predictions then run in that order, so the first success is
    the cheapest successful transformation and everything after it is pruned.
    Equal costs fall back to (tree index, path index) order, which makes the
    outcome identical to :func:`tweak_reversible`.
    """
    config = config or TweakConfig()
    values = _check_preconditions(forest, series, desired_label)
    paths = forest.extract_paths(desired_label)
    if not paths:
        return _failure(values, f"no decision paths labeled {desired_label!r}")

    candidates = [
        _apply_path(values, path, config, lock=False, abandon_at=None, trace=False)
        for path in paths
    ]
    viable = [c for c in candidates if not c.aborted]
    viable.sort(key=lambda c: (c.cost, c.path.tree_index, c.path.path_index))

    n_predictions = 0
    for candidate in viable:
        n_predictions += 1
        if forest.predict(candidate.values) == desired_label:
            pruned = 1.0 - n_predictions / len(viable)
            return _result_from(candidate, len(paths), n_predictions, pruned=pruned)
    pruned = 0.0 if viable else None
    return _failure(values, "no successful candidate", len(paths), n_predictions, pruned=pruned)


def tweak_irreversible(forest: ShapeletForest, series, desired_label: str,
                       config: TweakConfig | None = None,
                       early_abandon: bool = True) -> TweakResult:
    """Irreversible tweaking: edited windows are locked against later edits.

    Best-match searches skip windows overlapping locked regions, so a
    candidate's cost grows monotonically with each edit; a path that cannot
    find any unlocked window for a needed edit aborts.  With
    ``early_abandon`` a candidate is dropped as soon as its partial cost
    reaches the best successful cost so far, which cannot change the outcome
    because its final cost could not have been lower.
    """
    config = config or TweakConfig()
    values = _check_preconditions(forest, series, desired_label)
    paths = forest.extract_paths(desired_label)
    if not paths:
        return _failure(values, f"no decision paths labeled {desired_label!r}")

    best: _Candidate | None = None
    n_predictions = 0
    n_abandoned = 0
    traces: list[tuple[float, ...]] = []
    for path in paths:
        abandon_at = best.cost if (early_abandon and best is not None) else None
        candidate = _apply_path(
            values, path, config,
            lock=True, abandon_at=abandon_at, trace=config.record_cost_traces,
        )
        if config.record_cost_traces:
            traces.append(candidate.cost_trace)
        if candidate.abandoned:
            n_abandoned += 1
            continue
        if candidate.aborted:
            continue
        if best is not None and candidate.cost >= best.cost:
            continue
        n_predictions += 1
        if forest.predict(candidate.values) == desired_label:
            best = candidate
    abandoned_fraction = n_abandoned / len(paths)
    trace_out = tuple(traces) if config.record_cost_traces else None
    if best is None:
        return _failure(values, "no successful candidate", len(paths), n_predictions,
                        abandoned=abandoned_fraction, traces=trace_out)
    return _result_from(best, len(paths), n_predictions,
                        abandoned=abandoned_fraction, traces=trace_out)


def tweak_nn(series, desired_label: str, training_set: Sequence[tuple],
             forest: ShapeletForest | None = None) -> TweakResult:
    """Nearest-neighbor baseline: adopt the closest training series of the
    desired label wholesale.

    ``success`` is confirmed against ``forest`` when one is given and is
    False otherwise.
    """
    values = as_values(series)
    best_values = None
    best_dist = np.inf
    for candidate, label in training_set:
        cv = as_values(candidate)
        if str(label) != str(desired_label) or cv.size != values.size:
            continue
        dist = euclidean_distance(values, cv)
        if dist < best_dist:
            best_dist = dist
            best_values = cv
    if best_values is None:
        raise ContractViolation(
            f"training set has no series of length {values.size} labeled {desired_label!r}"
        )
    success = forest is not None and forest.predict(best_values) == str(desired_label)
    return TweakResult(
        transformed=TimeSeries(best_values),
        cost=float(best_dist),
        success=success,
        note="nearest-neighbor replacement",
    )
