from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from rstats.records import count_records


def signed_permutation_law(k: int) -> dict[int, Fraction]:
    """Exact law of the upper-record count by enumerating every signed arrangement.

    Magnitudes 1, 2, 4, ... are distinct powers of two, so no block of signed
    increments sums to zero and the path never ties.  A 0 origin is prepended.
    """
    mags = [2 ** i for i in range(k)]
    counts: Counter[int] = Counter()
    total = 0
    for perm in itertools.permutations(mags):
        for signs in itertools.product((1, -1), repeat=k):
            path = [0]
            for s, m in zip(signs, perm):
                path.append(path[-1] + s * m)
            counts[count_records(path).r_plus] += 1
            total += 1
    return {r: Fraction(c, total) for r, c in counts.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
