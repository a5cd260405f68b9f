import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import halfnorm, norm

from rstats.distributions import DistributionSpec
from rstats.errors import InvalidInputError, NullFormatError, NullMismatchError
from rstats.null import (
    NullDistribution,
    SigmaParams,
    SmallSampleWarning,
    Variant,
    asymptotic_record_law,
    build_null,
    exact_record_pmf,
    load_null,
    p_value,
    r_statistic,
    save_null,
    sigma_n,
)
from rstats.rng import RngSeed

# ---------------------------------------------------------------------------
# Exact and asymptotic laws
# ---------------------------------------------------------------------------


def test_exact_pmf_small_cases():
    assert exact_record_pmf(1).probs == {1: Fraction(1, 2), 2: Fraction(1, 2)}
    assert exact_record_pmf(2).probs == {1: Fraction(3, 8), 2: Fraction(3, 8), 3: Fraction(1, 4)}


@pytest.mark.parametrize("n", [1, 2, 3, 10, 33, 64])
def test_exact_pmf_sums_to_one_in_rationals(n):
    pmf = exact_record_pmf(n)
    assert sum(pmf.probs.values()) == 1
    assert sorted(pmf.probs) == list(range(1, n + 2))
    for r, prob in pmf.probs.items():
        assert prob == Fraction(math.comb(2 * n - r + 1, n), 2 ** (2 * n - r + 1))


@pytest.mark.parametrize("n", [65, 500, 10_000])
def test_exact_pmf_float_mode(n):
    pmf = exact_record_pmf(n)
    _, p = pmf.as_arrays()
    assert abs(p.sum() - 1.0) <= 1e-12
    for r in (1, 2, n // 3):
        ref = math.comb(2 * n - r + 1, n) / 2 ** (2 * n - r + 1)
        assert pmf.probs[r] == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_exact_pmf_rejects(bad):
    with pytest.raises(InvalidInputError):
        exact_record_pmf(bad)


def test_enumeration_oracle_n7():
    from conftest import signed_permutation_law

    assert signed_permutation_law(7) == exact_record_pmf(7).probs


def test_asymptotic_law():
    mean, var = asymptotic_record_law(100)
    assert mean == pytest.approx(11.2838, abs=1e-4)
    assert var == pytest.approx(72.6760, abs=1e-4)
    assert mean**2 * math.pi / 4 == pytest.approx(100)
    assert exact_record_pmf(1000).mean() == pytest.approx(math.sqrt(4000 / math.pi), rel=0.01)


def _ks_to(cdf, n):
    r, p = exact_record_pmf(n).as_arrays()
    upper = np.cumsum(p)
    g = cdf(r)
    return max(np.max(np.abs(upper - g)), np.max(np.abs(upper - p - g)))


def test_ks_to_gaussian_decreases():
    ks = []
    for n in (10, 100, 1000):
        mean, var = asymptotic_record_law(n)
        ks.append(_ks_to(lambda r: norm.cdf((r - mean) / math.sqrt(var)), n))
    assert ks[0] > ks[1] > ks[2]


def test_exact_law_approaches_half_normal():
    # P(R <= k) against the half-normal cdf at the lattice points
    gaps = []
    for n in (10, 100, 1000):
        r, p = exact_record_pmf(n).as_arrays()
        gaps.append(np.max(np.abs(np.cumsum(p) - halfnorm.cdf(r, scale=math.sqrt(2 * n)))))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01


# ---------------------------------------------------------------------------
# sigma_N and r
# ---------------------------------------------------------------------------


def test_sigma_n_values():
    assert sigma_n(100) == pytest.approx(12.906, abs=1e-3)
    assert sigma_n(10) == pytest.approx(3.231, rel=1e-3)
    big = 10**12
    assert sigma_n(big) / math.sqrt((2 - 4 / math.pi) * big) == pytest.approx(1.66, rel=1e-5)


def test_sigma_n_custom_params_and_errors():
    assert sigma_n(100, SigmaParams(1.0, 0.0, 0.5)) == pytest.approx(math.sqrt((2 - 4 / math.pi) * 100))
    with pytest.raises(InvalidInputError):
        sigma_n(1)
    with pytest.raises(InvalidInputError):
        SigmaParams(a=-1)
    with pytest.raises(InvalidInputError):
        SigmaParams(c=1.0)


def test_sigma_n_warns_below_ten():
    with pytest.warns(SmallSampleWarning):
        sigma_n(6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sigma_n(10)


def test_r_statistic():
    assert r_statistic(0.0, 100) == 0.0
    assert r_statistic(12.906, 100) == pytest.approx(1.0, abs=1e-4)
    # illustration with N = 6: mean R0 = 0.592 over sigma = 1.97 gives r = 0.3005
    assert 0.592 / 1.97 == pytest.approx(0.3005, abs=1e-4)
    with pytest.warns(SmallSampleWarning):
        assert r_statistic(0.592, 6) == pytest.approx(0.592 / sigma_n(6))


# ---------------------------------------------------------------------------
# Empirical nulls and p-values
# ---------------------------------------------------------------------------


def _toy_null(values, variant="single_r0", n=10):
    return NullDistribution(n, variant, len(values), 1, np.asarray(values, float))


def test_p_value_extremes():
    null = _toy_null(np.arange(200.0) - 99.5)
    assert p_value(null, -100.0, "less") == 1 / 201
    assert p_value(null, 1000.0, "greater") == 1 / 201
    assert p_value(null, 1000.0, "two_sided") == 1 / 201
    assert p_value(null, 0.0, "two_sided") == 1.0


def test_two_sided_symmetric_and_tail_doubling():
    vals = np.random.default_rng(2).standard_normal(500)
    null = _toy_null(vals)
    assert null.symmetric
    assert p_value(null, 1.3, "two_sided") == p_value(null, -1.3, "two_sided")
    skewed = NullDistribution(10, "single_r0", 500, 1, vals, DistributionSpec("exponential"))
    assert not skewed.symmetric
    g, l = p_value(skewed, 1.3, "greater"), p_value(skewed, 1.3, "less")
    assert p_value(skewed, 1.3, "two_sided") == min(1.0, 2 * min(g, l))
    assert not NullDistribution(10, "rplus2", 500, 1, vals, DistributionSpec("exponential"), n_y=8,
                                equalize="TRIM").symmetric
    assert NullDistribution(10, "rplus2", 500, 1, vals, DistributionSpec("exponential"), n_y=10,
                            equalize="TRIM").symmetric


def test_p_value_at_upper_percentile():
    vals = np.random.default_rng(1).standard_normal(10_000)
    null = _toy_null(vals)
    obs = np.quantile(vals, 0.975)
    assert p_value(null, obs, "greater") == pytest.approx(0.025, abs=0.001)


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=20))
def test_p_value_monotone_in_observed(obs):
    null = _toy_null(np.random.default_rng(3).standard_normal(150) * 10)
    obs = sorted(obs)
    ps = [p_value(null, o, "greater") for o in obs]
    assert all(a >= b for a, b in zip(ps, ps[1:]))
    assert all(0 < p <= 1 for p in ps)


def test_null_values_sorted_and_sized():
    null = _toy_null(np.random.default_rng(0).standard_normal(120))
    assert np.all(np.diff(null.values) >= 0)
    with pytest.raises(InvalidInputError):
        _toy_null(np.zeros(50))


def test_build_null_single_scale():
    null = build_null(100, "single_r0", m_draws=2000, p_perms=300, seed=RngSeed(12))
    sd = null.values.std(ddof=1)
    assert sd / sigma_n(100) == pytest.approx(1.0, abs=0.05)
    assert abs(null.values.mean()) < 5 * sd / math.sqrt(2000)


def test_build_null_is_reproducible():
    a = build_null(30, "rz_unpaired", 200, 20, seed=RngSeed(1), n_y=20)
    # bypass the in-memory cache
    from rstats.null import _build_null_cached

    b = _build_null_cached.__wrapped__(30, a.variant, 200, 20, a.generator, a.seed, a.n_y, a.equalize)
    assert np.array_equal(a.values, b.values)


def test_build_null_two_sample_centered():
    for variant in ("rplus2", "rd", "rz_paired"):
        null = build_null(100, variant, 1000, 100, seed=RngSeed(4))
        se = null.values.std(ddof=1) / math.sqrt(null.m_draws)
        assert abs(null.values.mean()) < 5 * se, variant


def test_build_null_rejects_alternative_generator():
    with pytest.raises(InvalidInputError):
        build_null(50, "single_r0", 200, 10, DistributionSpec(theta=0.1))
    with pytest.raises(InvalidInputError):
        build_null(50, "single_r0", 50, 10)


def test_save_load_round_trip(tmp_path):
    null = build_null(40, "rplus2", 150, 25, DistributionSpec("student_t", nu=3.0), RngSeed(3, 17), n_y=25,
                      equalize="RESAMPLE")
    path = tmp_path / "null.csv"
    save_null(null, path)
    back = load_null(path)
    assert np.array_equal(back.values, null.values)
    for attr in ("n", "variant", "m_draws", "p_perms", "generator", "seed", "n_y", "equalize"):
        assert getattr(back, attr) == getattr(null, attr)
    assert path.read_text().splitlines()[0] == "# version: 1"


def test_load_truncated_and_corrupt(tmp_path):
    null = build_null(20, "single_r0", 150, 10, seed=RngSeed(1))
    path = tmp_path / "t.csv"
    save_null(null, path)
    lines = path.read_text().splitlines()
    (tmp_path / "trunc.csv").write_text("\n".join(lines[:-5]) + "\n")
    with pytest.raises(NullFormatError):
        load_null(tmp_path / "trunc.csv")
    (tmp_path / "ver.csv").write_text("\n".join(["# version: 99"] + lines[1:]) + "\n")
    with pytest.raises(NullFormatError):
        load_null(tmp_path / "ver.csv")
    (tmp_path / "junk.csv").write_text("\n".join(lines[:-1] + ["abc"]) + "\n")
    with pytest.raises(NullFormatError):
        load_null(tmp_path / "junk.csv")
    with pytest.raises(NullFormatError):
        load_null(tmp_path / "missing.csv")


def test_variant_mismatch():
    null = build_null(20, "single_r0", 150, 10, seed=RngSeed(1))
    null.ensure_matches("single_r0", 20)
    with pytest.raises(NullMismatchError):
        null.ensure_matches("rz_paired", 20)
    with pytest.raises(NullMismatchError):
        null.ensure_matches("single_r0", 21)
    two = build_null(20, "rd", 150, 10, seed=RngSeed(1), n_y=15)
    two.ensure_matches("rd", 20, 15, "TRIM", DistributionSpec())
    with pytest.raises(NullMismatchError):
        two.ensure_matches("rd", 20, 15, "RESAMPLE")
    with pytest.raises(NullMismatchError):
        two.ensure_matches("rd", 20, 15, "TRIM", DistributionSpec("uniform"))


def test_variant_parse():
    assert Variant.parse("RD") is Variant.RD
    assert Variant.RPLUS2.parametric and not Variant.RZ_UNPAIRED.parametric
    with pytest.raises(InvalidInputError):
        Variant.parse("nope")
