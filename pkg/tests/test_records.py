import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rstats.errors import InvalidInputError
from rstats.records import count_records, cumulative_sum, r0_of_sample

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
samples = st.lists(finite, min_size=1, max_size=60)


@pytest.mark.parametrize(
    "sample, expected",
    [([1, 2, -1, 3], [1, 3, 2, 5]), ([0.5], [0.5]), ([1, -1, 1, -1], [1, 0, 1, 0])],
)
def test_cumulative_sum_examples(sample, expected):
    assert cumulative_sum(sample).tolist() == expected


def test_cumulative_sum_is_left_to_right():
    x = np.random.default_rng(0).standard_normal(500)
    acc, out = 0.0, []
    for v in x.tolist():
        acc += v
        out.append(acc)
    assert cumulative_sum(x).tolist() == out


@pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")], [[1.0, 2.0]]])
def test_invalid_samples_rejected(bad):
    with pytest.raises(InvalidInputError):
        cumulative_sum(bad)


def test_count_records_hand_example():
    rc = count_records([1, 3, 2, 5])
    assert (rc.r_plus, rc.r_minus, rc.r0) == (3, 1, 2)


def test_count_records_empty_path():
    with pytest.raises(InvalidInputError):
        count_records([])


def test_monotone_paths():
    n = 17
    rc = count_records(np.arange(1.0, n + 1))
    assert (rc.r_plus, rc.r_minus, rc.r0) == (n, 1, n - 1)
    assert r0_of_sample([-1, -2, -3]) == -2
    assert r0_of_sample([1, 2, -1, 3]) == 2


def test_ties_register_no_record():
    rc = count_records([0.0, 1.0, 1.0, 0.0, -1.0, -1.0])
    assert rc.r_plus == 2 and rc.r_minus == 2
    assert rc.ties == 3  # indices 2 (max), 3 and 5 (min)
    all_zero = count_records(np.zeros(5))
    assert (all_zero.r_plus, all_zero.r_minus, all_zero.ties) == (1, 1, 4)


@given(samples)
def test_negation_swaps_records(xs):
    a = count_records(cumulative_sum(xs))
    b = count_records(cumulative_sum([-v for v in xs]))
    assert (a.r_plus, a.r_minus) == (b.r_minus, b.r_plus)
    assert r0_of_sample([-v for v in xs]) == -r0_of_sample(xs)


@given(samples, st.sampled_from([0.5, 2.0, 4.0, 1024.0]))
def test_scale_invariance(xs, c):
    # powers of two keep the scaling exact in floating point
    assert count_records(cumulative_sum(xs)) == count_records(cumulative_sum([c * v for v in xs]))


@given(st.lists(finite, min_size=1, max_size=60))
def test_bounds(path):
    rc = count_records(path)
    n = len(path)
    assert 1 <= rc.r_plus <= n and 1 <= rc.r_minus <= n
    assert rc.r_plus + rc.r_minus <= n + 1
    assert abs(rc.r0) <= n - 1
    strictly_increasing = all(b > a for a, b in zip(path, path[1:]))
    assert (rc.r_plus == n) == strictly_increasing


@given(st.lists(finite, min_size=1, max_size=30))
def test_appending_running_max_adds_no_record(path):
    before = count_records(path)
    after = count_records(path + [max(path)])
    assert after.r_plus == before.r_plus


@settings(deadline=None, max_examples=1)
@given(st.just(None))
def test_enumeration_matches_exact_law_small(_):
    from conftest import signed_permutation_law
    from rstats.null import exact_record_pmf

    for k in range(1, 6):
        assert signed_permutation_law(k) == exact_record_pmf(k).probs
