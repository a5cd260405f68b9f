import math

import numpy as np
import pytest

from rstats.distributions import DistributionSpec
from rstats.errors import DegenerateInputError, InvalidInputError, NullMismatchError
from rstats.null import Variant, build_null, sigma_n, variant_statistics
from rstats.permutation import unpaired_mean_rz
from rstats.rng import RngSeed, keys_for
from rstats.sntest import TestConfig, r_test_single, r_test_two, two_sample_statistic

CFG = TestConfig(p_perms=200, m_draws=400, seed=RngSeed(21))
TWO_VARIANTS = ("rz_paired", "rz_unpaired", "rplus2", "rminus2", "rd")


@pytest.fixture
def xy(rng):
    return rng.standard_normal(40), rng.standard_normal(40) + 0.2


# ---------------------------------------------------------------------------
# single sample
# ---------------------------------------------------------------------------


def test_all_positive_sample_is_extreme(rng):
    x = np.abs(rng.standard_normal(50)) + 0.01
    cfg = TestConfig(p_perms=50, m_draws=300, alternative="greater", seed=RngSeed(1))
    res = r_test_single(x, cfg)
    assert res.raw == 49
    assert res.p_value == 1 / 301
    assert res.statistic == pytest.approx(49 / sigma_n(50))
    assert res.normalized == res.statistic
    assert res.method == "single_r0" and res.n_y is None


def test_negation_antisymmetry(rng):
    x = rng.standard_normal(60) + 0.1
    a = r_test_single(x, CFG)
    b = r_test_single(-x, CFG)
    assert b.statistic == -a.statistic
    assert b.p_value == a.p_value
    assert 0 < a.p_value <= 1


def test_single_errors(rng):
    with pytest.raises(DegenerateInputError):
        r_test_single([1.0], CFG)
    with pytest.raises(DegenerateInputError):
        r_test_single(np.zeros(20), CFG)
    with pytest.raises(InvalidInputError):
        r_test_single([1.0, np.nan, 2.0], CFG)
    with pytest.raises(InvalidInputError):
        TestConfig(m_draws=10)


def test_table_mismatch_and_reuse(rng):
    x = rng.standard_normal(30)
    table = build_null(30, "single_r0", 300, 40, seed=RngSeed(5))
    res = r_test_single(x, TestConfig(p_perms=999, m_draws=300, null=table, seed=RngSeed(2)))
    assert res.p_perms == 40 and res.m_draws == 300
    with pytest.raises(NullMismatchError):
        r_test_single(rng.standard_normal(31), TestConfig(m_draws=300, null=table))


def test_result_serializes(rng):
    d = r_test_two(*[rng.standard_normal(20) for _ in range(2)], "rd", CFG).to_dict()
    assert d["parametric"] is True and d["generator"]["family"] == "gaussian"
    assert d["seed"] == "21:0"


# ---------------------------------------------------------------------------
# two samples
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("variant", ["rz_paired", "rplus2", "rminus2", "rd"])
def test_identical_samples_give_zero(variant, rng):
    x = rng.standard_normal(30)
    res = r_test_two(x, x.copy(), variant, CFG)
    assert res.statistic == 0.0
    assert 0 < res.p_value <= 1


@pytest.mark.parametrize("variant", ["rplus2", "rminus2", "rd", "rz_paired"])
def test_swap_negates(variant, xy):
    x, y = xy
    a, _ = two_sample_statistic(x, y, variant, 300, RngSeed(3))
    b, _ = two_sample_statistic(y, x, variant, 300, RngSeed(3))
    assert b == -a


def test_swap_negates_unpaired_in_expectation(rng):
    x, y = rng.standard_normal(50) + 0.3, rng.standard_normal(50)
    a = unpaired_mean_rz(x, y, 20_000, "TRIM", RngSeed(3))
    b = unpaired_mean_rz(y, x, 20_000, "TRIM", RngSeed(4))
    assert a.mean_r0 > 0
    assert abs(a.mean_r0 + b.mean_r0) < 4 * math.hypot(a.std_err, b.std_err)


def test_rd_is_rplus_minus_rminus(xy):
    x, y = xy
    vals = {v: two_sample_statistic(x, y, v, 250, RngSeed(8))[0] for v in ("rplus2", "rminus2", "rd")}
    assert vals["rd"] == vals["rplus2"] - vals["rminus2"]


@pytest.mark.parametrize("variant", TWO_VARIANTS)
def test_scale_invariance(variant, xy):
    x, y = xy
    a = r_test_two(x, y, variant, CFG)
    b = r_test_two(3.7 * x, 3.7 * y, variant, CFG)
    assert (a.statistic, a.p_value) == (b.statistic, b.p_value)


def test_rminus2_alternative_flipped(rng):
    x, y = rng.standard_normal(60) + 1.0, rng.standard_normal(60)
    cfg = TestConfig(p_perms=200, m_draws=400, alternative="greater", seed=RngSeed(2))
    res = r_test_two(x, y, "rminus2", cfg)
    less = r_test_two(x, y, "rminus2", TestConfig(p_perms=200, m_draws=400, alternative="less", seed=RngSeed(2)))
    assert res.statistic < 0
    assert res.p_value < less.p_value
    assert res.alternative == "greater"


def test_normalized_only_for_rz(xy):
    x, y = xy
    res = r_test_two(x, y[:25], "rz_unpaired", CFG)
    assert res.normalized == pytest.approx(res.raw / sigma_n(25))
    assert r_test_two(x, y, "rplus2", CFG).normalized is None
    assert r_test_two(x, y, "rz_paired", CFG).parametric is False


def test_two_sample_errors(rng):
    with pytest.raises(InvalidInputError):
        r_test_two(rng.standard_normal(10), rng.standard_normal(9), "rz_paired", CFG)
    with pytest.raises(DegenerateInputError):
        r_test_two([1.0], [1.0, 2.0], "rd", CFG)
    with pytest.raises(InvalidInputError):
        r_test_two([1.0, 2.0], [1.0, 2.0], "single_r0", CFG)


def test_parametric_null_follows_generator(rng):
    x, y = rng.standard_normal(20), rng.standard_normal(20)
    uni = DistributionSpec("uniform")
    res = r_test_two(x, y, "rd", TestConfig(p_perms=50, m_draws=200, generator=uni))
    assert '"uniform"' in res.generator
    # rz variants always use the Gaussian-built null
    assert r_test_two(x, y, "rz_unpaired", TestConfig(p_perms=50, m_draws=200, generator=uni)).generator is None


def test_unequal_lengths_resample(rng):
    cfg = TestConfig(p_perms=100, m_draws=200, equalize="RESAMPLE")
    res = r_test_two(rng.standard_normal(30), rng.standard_normal(12), "rz_unpaired", cfg)
    assert math.isfinite(res.statistic) and 0 < res.p_value <= 1


# ---------------------------------------------------------------------------
# batch statistics agree with the single-call path
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("variant", TWO_VARIANTS)
def test_rows_equal_single_statistic(variant, rng):
    X, Y = rng.standard_normal((4, 25)), rng.standard_normal((4, 25 if variant == "rz_paired" else 19))
    seeds = [RngSeed(7).spawn(k) for k in range(4)]
    rows = variant_statistics(variant, X, Y, 60, keys_for(seeds), "TRIM")
    for k, s in enumerate(seeds):
        assert rows[k] == two_sample_statistic(X[k], Y[k], variant, 60, s, "TRIM")[0]


def test_variant_enum_two_sample_flag():
    assert not Variant.SINGLE_R0.two_sample
    assert all(Variant.parse(v).two_sample for v in TWO_VARIANTS)
