"""Permutation-averaged record statistics.

Each estimate averages record counts over ``p`` uniformly random rearrangements
of the sample.  Round ``r`` uses a substream derived from the seed key and
``r`` only, so estimates are bit-identical for a given :class:`RngSeed`
regardless of the number of worker threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateInputError, InvalidInputError
from .records import as_sample
from .rng import RngSeed, coerce_seed


class EqualizeStrategy(str, enum.Enum):
    """How two samples of unequal length are brought to a common length m.

    TRIM: m = min(Nx, Ny); every round draws a fresh random subset of the larger.
    RESAMPLE: m = max(Nx, Ny); the smaller is drawn with replacement every round.
    """

    TRIM = "TRIM"
    RESAMPLE = "RESAMPLE"

    @classmethod
    def parse(cls, value) -> "EqualizeStrategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise InvalidInputError(f"unknown equalize strategy {value!r}") from None

    def length(self, nx: int, ny: int) -> int:
        return min(nx, ny) if self is EqualizeStrategy.TRIM else max(nx, ny)


@dataclass(frozen=True)
class PermutationEstimate:
    mean_r0: float
    mean_r_plus: float
    mean_r_minus: float
    p: int
    std_err: float
    seed: RngSeed
    ties: int = 0


def _estimate(sums, p: int, seed: RngSeed) -> PermutationEstimate:
    srp, srm, sq, ties = (int(v) for v in sums)
    mean = (srp - srm) / p
    if p > 1:
        var = max(sq / p - mean * mean, 0.0) * p / (p - 1)
        se = math.sqrt(var / p)
    else:
        se = math.nan
    return PermutationEstimate(mean, srp / p, srm / p, p, se, seed, ties)


def _check_p(p) -> int:
    if int(p) != p or p < 1:
        raise InvalidInputError(f"permutation count must be a positive integer, got {p!r}")
    return int(p)


def mean_record_counts(sample, p: int, seed=None, m: int | None = None) -> PermutationEstimate:
    """Average R+, R- and R0 over ``p`` random rearrangements of ``sample``.

    ``m`` is the path length per round (default: the sample length).  When
    ``m`` is smaller than the sample each round uses a fresh random subset; when
    larger, values are drawn with replacement.
    """
    x = as_sample(sample)
    p = _check_p(p)
    seed = coerce_seed(seed)
    m = x.size if m is None else int(m)
    if x.size < 2 or m < 2:
        raise DegenerateInputError("need at least 2 values: R0 is identically 0 for one value")
    return _estimate(_kernels.perm_sums(x, m, p, seed.key()), p, seed)


def mean_r0(sample, p: int, seed=None) -> PermutationEstimate:
    """Permutation average of R0 for one sample (all three means are filled)."""
    return mean_record_counts(sample, p, seed)


def paired_difference(x, y) -> np.ndarray:
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    if x.size != y.size:
        raise InvalidInputError(f"paired samples differ in length ({x.size} vs {y.size})")
    return x - y


def unpaired_mean_rz(x, y, p: int, equalize=EqualizeStrategy.TRIM, seed=None) -> PermutationEstimate:
    """Average R0 of the difference path of independently rearranged x and y."""
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    p = _check_p(p)
    seed = coerce_seed(seed)
    m = EqualizeStrategy.parse(equalize).length(x.size, y.size)
    if m < 2:
        raise DegenerateInputError(f"equalized length {m} < 2")
    return _estimate(_kernels.unpaired_sums(x, y, m, p, seed.key()), p, seed)


# ---------------------------------------------------------------------------
# Batched versions: row k of the result equals the single-sample call with
# seeds[k].  Used to build nulls and run power experiments.
# ---------------------------------------------------------------------------


def _rows(X, name: str) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a 2-d array of samples")
    return X


def record_means_rows(X, p: int, keys: np.ndarray, m: int | None = None) -> np.ndarray:
    """(rows, 2) array of mean R+ and mean R- per row."""
    X = _rows(X, "X")
    m = X.shape[1] if m is None else int(m)
    p = _check_p(p)
    sums = _kernels.perm_sums_rows(X, m, p, np.asarray(keys, dtype=np.uint64))
    return sums[:, :2] / p


def mean_r0_rows(X, p: int, keys: np.ndarray, m: int | None = None) -> np.ndarray:
    X = _rows(X, "X")
    m = X.shape[1] if m is None else int(m)
    p = _check_p(p)
    sums = _kernels.perm_sums_rows(X, m, p, np.asarray(keys, dtype=np.uint64))
    return (sums[:, 0] - sums[:, 1]) / p


def unpaired_rz_rows(X, Y, p: int, keys: np.ndarray, equalize=EqualizeStrategy.TRIM) -> np.ndarray:
    X = _rows(X, "X")
    Y = _rows(Y, "Y")
    p = _check_p(p)
    m = EqualizeStrategy.parse(equalize).length(X.shape[1], Y.shape[1])
    sums = _kernels.unpaired_sums_rows(X, Y, m, p, np.asarray(keys, dtype=np.uint64))
    return (sums[:, 0] - sums[:, 1]) / p
