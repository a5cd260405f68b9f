"""Upper and lower records of cumulative-sum paths.

A point of a path is an upper (lower) record when it is strictly above (below)
every earlier point.  The first point counts as a record of both kinds; no
origin is prepended.  Ties with the running maximum or minimum register no
record and are counted separately so callers can flag discrete data.

These are plain-Python reference implementations; the permutation kernels in
:mod:`rstats._kernels` fuse the same rules into their inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class RecordCounts:
    r_plus: int
    r_minus: int
    ties: int = 0

    @property
    def r0(self) -> int:
        return self.r_plus - self.r_minus


def as_sample(values: Sequence[float] | np.ndarray, name: str = "sample") -> np.ndarray:
    """Validate ``values`` as a non-empty 1-d array of finite floats."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or infinite values")
    return arr


def cumulative_sum(sample) -> np.ndarray:
    """Running sum X_t = x_1 + ... + x_t, accumulated left to right."""
    x = as_sample(sample)
    return np.cumsum(x)


def count_records(path) -> RecordCounts:
    pts = np.asarray(path, dtype=np.float64)
    if pts.ndim != 1 or pts.size == 0:
        raise InvalidInputError("path must be a non-empty 1-d sequence")
    hi = lo = float(pts[0])
    r_plus = r_minus = 1
    ties = 0
    for v in pts[1:].tolist():
        if v > hi:
            hi = v
            r_plus += 1
        elif v < lo:
            lo = v
            r_minus += 1
        elif v == hi or v == lo:
            ties += 1
    return RecordCounts(r_plus, r_minus, ties)


def r0_of_sample(sample) -> int:
    """R0 = R+ - R- of the cumulative sum of ``sample`` in its given order."""
    return count_records(cumulative_sum(sample)).r0
