"""One- and two-sample r-tests for the signal-to-noise ratio.

The statistic of the observed data is computed with the permutation stream
``cfg.seed``; unless a table is supplied, the empirical null is built on the
independent stream ``cfg.seed.spawn(NULL_STREAM)`` and cached in memory.

Two-sample statistics are "x minus y".  ``alternative="greater"`` always means
"x has the larger signal-to-noise ratio": for ``rminus2``, whose value drops
when x drifts upwards, the tail is flipped internally.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import GAUSSIAN, DistributionSpec
from .errors import DegenerateInputError, InvalidInputError
from .null import (
    Alternative,
    NullDistribution,
    Variant,
    build_null,
    p_value,
    r_statistic,
    sigma_n,
)
from .permutation import (
    EqualizeStrategy,
    mean_r0,
    mean_record_counts,
    paired_difference,
    unpaired_mean_rz,
)
from .records import as_sample
from .rng import RngSeed, coerce_seed

NULL_STREAM = 0x6E756C6C  # "null"


@dataclass(frozen=True)
class TestConfig:
    p_perms: int = 10_000
    m_draws: int = 10_000
    alternative: Alternative = Alternative.TWO_SIDED
    equalize: EqualizeStrategy = EqualizeStrategy.TRIM
    seed: RngSeed = field(default_factory=RngSeed)
    null: NullDistribution | None = None
    generator: DistributionSpec = GAUSSIAN

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if int(self.p_perms) != self.p_perms or self.p_perms < 1:
            raise InvalidInputError("p_perms must be >= 1")
        if int(self.m_draws) != self.m_draws or self.m_draws < 100:
            raise InvalidInputError("m_draws must be >= 100")
        object.__setattr__(self, "alternative", Alternative.parse(self.alternative))
        object.__setattr__(self, "equalize", EqualizeStrategy.parse(self.equalize))
        object.__setattr__(self, "seed", coerce_seed(self.seed))
        if self.generator is None:
            raise InvalidInputError("a generator spec is required")


@dataclass(frozen=True)
class TestResult:
    method: str
    statistic: float
    normalized: float | None
    raw: float
    p_value: float
    alternative: str
    n_x: int
    n_y: int | None
    p_perms: int
    m_draws: int
    seed: str
    ties_seen: int
    parametric: bool = False
    generator: str | None = None

    __test__ = False

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.generator is not None:
            d["generator"] = json.loads(self.generator)
        return d


def _null_for(cfg: TestConfig, variant: Variant, n: int, n_y: int | None) -> NullDistribution:
    if cfg.null is not None:
        cfg.null.ensure_matches(variant, n, n_y, cfg.equalize, cfg.generator if variant.parametric else None)
        return cfg.null
    generator = cfg.generator if variant.parametric else GAUSSIAN
    return build_null(n, variant, cfg.m_draws, cfg.p_perms, generator,
                      cfg.seed.spawn(NULL_STREAM), n_y, cfg.equalize)


def r_test_single(sample, cfg: TestConfig | None = None) -> TestResult:
    """Test zero signal-to-noise ratio of one sample with the r-statistic.

    The reported statistic is r = mean R0 / sigma_N.  When ``cfg.null`` is a
    loaded table, its permutation count is used for the observed statistic so
    the two are comparable.
    """
    cfg = cfg or TestConfig()
    x = as_sample(sample)
    if x.size < 2:
        raise DegenerateInputError("need at least 2 values")
    if not np.any(x):
        raise DegenerateInputError("all values are zero: the cumulative sum carries no records")
    p = cfg.null.p_perms if cfg.null is not None else cfg.p_perms
    null = _null_for(cfg, Variant.SINGLE_R0, x.size, None)
    est = mean_r0(x, p, cfg.seed)
    r = r_statistic(est.mean_r0, x.size)
    return TestResult(
        method=Variant.SINGLE_R0.value,
        statistic=r,
        normalized=r,
        raw=est.mean_r0,
        p_value=p_value(null, est.mean_r0, cfg.alternative),
        alternative=cfg.alternative.value,
        n_x=int(x.size),
        n_y=None,
        p_perms=p,
        m_draws=null.m_draws,
        seed=str(cfg.seed),
        ties_seen=est.ties,
    )


def two_sample_statistic(x, y, variant, p: int, seed, equalize=EqualizeStrategy.TRIM) -> tuple[float, int]:
    """(raw statistic, ties seen) of a two-sample variant."""
    variant = Variant.parse(variant)
    seed = coerce_seed(seed)
    if variant is Variant.RZ_PAIRED:
        est = mean_r0(paired_difference(x, y), p, seed)
        return est.mean_r0, est.ties
    if variant is Variant.RZ_UNPAIRED:
        est = unpaired_mean_rz(x, y, p, equalize, seed)
        return est.mean_r0, est.ties
    if variant is Variant.SINGLE_R0:
        raise InvalidInputError("single_r0 is not a two-sample variant")
    m = EqualizeStrategy.parse(equalize).length(len(x), len(y))
    ex = mean_record_counts(x, p, seed, m)
    ey = mean_record_counts(y, p, seed, m)
    plus = ex.mean_r_plus - ey.mean_r_plus
    minus = ex.mean_r_minus - ey.mean_r_minus
    value = {Variant.RPLUS2: plus, Variant.RMINUS2: minus, Variant.RD: plus - minus}[variant]
    return value, ex.ties + ey.ties


def r_test_two(x, y, variant="rz_unpaired", cfg: TestConfig | None = None) -> TestResult:
    """Two-sample test of equal distribution and equal signal-to-noise ratio.

    rz variants are referred to Gaussian-built nulls (record counts of the
    difference path do not depend on the distribution).  rplus2, rminus2 and rd
    use nulls built from ``cfg.generator`` and are flagged parametric.
    """
    cfg = cfg or TestConfig()
    variant = Variant.parse(variant)
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    if variant is Variant.RZ_PAIRED and x.size != y.size:
        raise InvalidInputError(f"paired test needs equal lengths ({x.size} vs {y.size})")
    if x.size < 2 or y.size < 2:
        raise DegenerateInputError("each sample needs at least 2 values")
    p = cfg.null.p_perms if cfg.null is not None else cfg.p_perms
    null = _null_for(cfg, variant, x.size, y.size)
    raw, ties = two_sample_statistic(x, y, variant, p, cfg.seed, cfg.equalize)
    alternative = cfg.alternative.flipped() if variant is Variant.RMINUS2 else cfg.alternative
    normalized = None
    if variant in (Variant.RZ_PAIRED, Variant.RZ_UNPAIRED):
        normalized = raw / sigma_n(cfg.equalize.length(x.size, y.size) if variant is Variant.RZ_UNPAIRED
                                   else x.size)
    return TestResult(
        method=variant.value,
        statistic=raw,
        normalized=normalized,
        raw=raw,
        p_value=p_value(null, raw, alternative),
        alternative=cfg.alternative.value,
        n_x=int(x.size),
        n_y=int(y.size),
        p_perms=p,
        m_draws=null.m_draws,
        seed=str(cfg.seed),
        ties_seen=ties,
        parametric=variant.parametric,
        generator=null.generator.to_json() if variant.parametric else None,
    )
