"""Synthetic labeled series with planted shapes, for tests and benchmarks."""

from __future__ import annotations

import numpy as np

__all__ = ["make_planted_dataset"]


def _bump(length: int, center: int, width: int, amplitude: float) -> np.ndarray:
    out = np.zeros(length)
    lo = max(0, center - width)
    hi = min(length, center + width + 1)
    t = np.arange(lo, hi)
    out[lo:hi] = amplitude * np.sin(np.pi * (t - lo) / max(hi - lo - 1, 1))
    return out


def make_planted_dataset(n_per_class: int, length: int = 48, seed: int = 0,
                         kind: str = "two_bumps", noise: float = 0.1,
                         jitter: int = 2) -> list[tuple[np.ndarray, str]]:
    """Two perfectly separable classes of noisy series.

    ``two_bumps``: class "pos" carries a positive bump in the left third,
    class "neg" one in the right third.  ``bump_vs_flat``: class "bump"
    carries the bump, class "flat" is noise only.  Bump centers jitter by up
    to ``jitter`` samples so shapelet positions are not pinned exactly.
    """
    rng = np.random.default_rng(seed)
    width = max(3, length // 8)
    out: list[tuple[np.ndarray, str]] = []

    if kind == "two_bumps":
        specs = [("pos", length // 4), ("neg", 3 * length // 4)]
    elif kind == "bump_vs_flat":
        specs = [("bump", length // 4), ("flat", None)]
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")

    for label, center in specs:
        for _ in range(n_per_class):
            values = rng.normal(0.0, noise, size=length)
            if center is not None:
                shifted = center + int(rng.integers(-jitter, jitter + 1))
                values = values + _bump(length, shifted, width, amplitude=2.0)
            out.append((values, label))
    return out
