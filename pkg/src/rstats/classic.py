"""Classical statistics used as power benchmarks.

Only raw scores are returned; ROC/AUC comparisons never need p-values.  The
``*_rows`` variants score every row of a 2-d array at once.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateInputError, InvalidInputError
from .records import as_sample


def _at_least_two(x: np.ndarray, name: str = "sample") -> None:
    if x.size < 2:
        raise InvalidInputError(f"{name} needs at least 2 values")


def t_statistic(sample) -> float:
    """mean / sd * sqrt(N), with the unbiased (N - 1) variance."""
    x = as_sample(sample)
    _at_least_two(x)
    sd = x.std(ddof=1)
    if sd == 0:
        raise DegenerateInputError("constant sample has zero variance")
    return float(x.mean() / sd * np.sqrt(x.size))


def sign_statistic(sample) -> float:
    x = as_sample(sample)
    return float(np.sum(x > 0) - np.sum(x < 0))


def wilcoxon_signed_rank(sample) -> float:
    """Sum of sign(x) * rank(|x|); zeros dropped, tied magnitudes share ranks."""
    x = as_sample(sample)
    x = x[x != 0]
    if x.size == 0:
        return 0.0
    return float(np.sum(np.sign(x) * rankdata(np.abs(x))))


def mann_whitney_u(x, y) -> float:
    """Centered U: #{x_i > y_j} + #{ties}/2 - Nx*Ny/2."""
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    return float(mann_whitney_rows(x[None, :], y[None, :])[0])


def welch_t(x, y) -> float:
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    _at_least_two(x, "x")
    _at_least_two(y, "y")
    se2 = x.var(ddof=1) / x.size + y.var(ddof=1) / y.size
    if se2 == 0:
        raise DegenerateInputError("both samples have zero variance")
    return float((x.mean() - y.mean()) / np.sqrt(se2))


# ---------------------------------------------------------------------------
# Row-wise versions
# ---------------------------------------------------------------------------


def t_rows(X: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        return X.mean(axis=1) / X.std(axis=1, ddof=1) * np.sqrt(n)


def sign_rows(X: np.ndarray) -> np.ndarray:
    return (np.sum(X > 0, axis=1) - np.sum(X < 0, axis=1)).astype(float)


def wilcoxon_rows(X: np.ndarray) -> np.ndarray:
    # zeros have the smallest magnitude, so ranks among non-zeros are shifted by their count
    ranks = rankdata(np.abs(X), axis=1) - np.sum(X == 0, axis=1, keepdims=True)
    return np.sum(np.sign(X) * ranks, axis=1)


def mann_whitney_rows(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    nx, ny = X.shape[1], Y.shape[1]
    ranks = rankdata(np.concatenate([X, Y], axis=1), axis=1)
    u = ranks[:, :nx].sum(axis=1) - nx * (nx + 1) / 2.0
    return u - nx * ny / 2.0


def welch_rows(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    se = np.sqrt(X.var(axis=1, ddof=1) / X.shape[1] + Y.var(axis=1, ddof=1) / Y.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        return (X.mean(axis=1) - Y.mean(axis=1)) / se
