"""Time series values, subsequence views, and sliding-window Euclidean matching.

Everything here is immutable after construction and safe to share between
threads.  Distances are plain (unnormalized) Euclidean norms computed in
double precision; threshold comparisons elsewhere in the package use exact
<= / > on these values.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ContractViolation

__all__ = [
    "TimeSeries",
    "Subsequence",
    "Shapelet",
    "MatchLocation",
    "as_values",
    "euclidean_distance",
    "distance_profile",
    "subsequence_distance",
    "matches_within",
]


def _validated_array(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise ContractViolation(f"{what} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ContractViolation(f"{what} must contain at least one value")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{what} contains non-finite values")
    arr.setflags(write=False)
    return arr


class TimeSeries:
    """An ordered sequence of finite real values sampled at equal intervals."""

    __slots__ = ("values",)

    def __init__(self, values):
        object.__setattr__(self, "values", _validated_array(values, "time series"))

    def __setattr__(self, name, value):
        raise AttributeError("TimeSeries is immutable")

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, index):
        return self.values[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.all(self.values == other.values)
        )

    def __repr__(self) -> str:
        return f"TimeSeries(length={len(self)})"

    def subsequence(self, start: int, length: int) -> "Subsequence":
        return Subsequence(self, start, length)


class Shapelet:
    """An owned subsequence used as a class-discriminatory feature."""

    __slots__ = ("values",)

    def __init__(self, values):
        object.__setattr__(self, "values", _validated_array(values, "shapelet"))

    def __setattr__(self, name, value):
        raise AttributeError("Shapelet is immutable")

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Shapelet):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.all(self.values == other.values)
        )

    def __repr__(self) -> str:
        return f"Shapelet(length={len(self)})"


class Subsequence:
    """A zero-copy view of ``length`` contiguous elements of a series."""

    __slots__ = ("source", "start", "length")

    def __init__(self, source: TimeSeries, start: int, length: int):
        if length < 1:
            raise ContractViolation("subsequence length must be >= 1")
        if start < 0 or start + length > len(source):
            raise ContractViolation(
                f"subsequence [{start}, {start + length}) exceeds series of length {len(source)}"
            )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "length", int(length))

    def __setattr__(self, name, value):
        raise AttributeError("Subsequence is immutable")

    @property
    def values(self) -> np.ndarray:
        return self.source.values[self.start : self.start + self.length]

    def __len__(self) -> int:
        return self.length

    def materialize(self) -> Shapelet:
        return Shapelet(self.values)


class MatchLocation(NamedTuple):
    """Window start of a shapelet match and its Euclidean distance."""

    start: int
    distance: float


def as_values(obj) -> np.ndarray:
    """Coerce a TimeSeries, Shapelet, Subsequence, or array-like to float64 values."""
    if isinstance(obj, (TimeSeries, Shapelet, Subsequence)):
        return obj.values
    return np.asarray(obj, dtype=np.float64)


def euclidean_distance(a, b) -> float:
    """Euclidean norm of the elementwise difference of two equal-length sequences."""
    av = as_values(a)
    bv = as_values(b)
    if av.shape != bv.shape:
        raise ContractViolation(
            f"length mismatch: {av.shape[0] if av.ndim else 0} vs {bv.shape[0] if bv.ndim else 0}"
        )
    if av.size < 1:
        raise ContractViolation("sequences must contain at least one value")
    return float(np.sqrt(np.sum((av - bv) ** 2)))


def distance_profile(shapelet, series) -> np.ndarray:
    """Euclidean distance of a shapelet to every window of the series.

    Entry ``i`` is the distance to the window starting at index ``i``; the
    profile has ``m - l + 1`` entries.
    """
    sv = as_values(shapelet)
    tv = as_values(series)
    if sv.size > tv.size:
        raise ContractViolation(
            f"shapelet of length {sv.size} longer than series of length {tv.size}"
        )
    windows = sliding_window_view(tv, sv.size)
    return np.sqrt(np.sum((windows - sv) ** 2, axis=1))


def subsequence_distance(shapelet, series) -> MatchLocation:
    """Best-matching window of the shapelet, ties broken by the smallest start."""
    profile = distance_profile(shapelet, series)
    start = int(np.argmin(profile))
    return MatchLocation(start=start, distance=float(profile[start]))


def matches_within(shapelet, series, theta: float) -> list[MatchLocation]:
    """All window starts whose distance is <= ``theta``, ascending by start."""
    if theta < 0:
        raise ContractViolation("theta must be non-negative")
    profile = distance_profile(shapelet, series)
    starts = np.flatnonzero(profile <= theta)
    return [MatchLocation(start=int(s), distance=float(profile[s])) for s in starts]
