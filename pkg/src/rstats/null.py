"""Record-number laws, the sigma_N normalization and empirical null tables."""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .distributions import GAUSSIAN, DistributionSpec, generate_rows
from .errors import InvalidInputError, NullFormatError, NullMismatchError
from .permutation import (
    EqualizeStrategy,
    mean_r0_rows,
    record_means_rows,
    unpaired_rz_rows,
)
from .rng import RngSeed, coerce_seed, keys_for

EXACT_LIMIT = 64
MAX_STEPS = 10_000
TABLE_VERSION = 1

# ---------------------------------------------------------------------------
# Exact and asymptotic record-number laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactRecordPmf:
    """P(R, N) = C(2N - R + 1, N) / 2**(2N - R + 1) for R = 1 .. N + 1."""

    n_steps: int
    probs: dict

    def mean(self) -> float:
        return float(sum(r * p for r, p in self.probs.items()))

    def variance(self) -> float:
        mu = sum(r * p for r, p in self.probs.items())
        return float(sum((r - mu) ** 2 * p for r, p in self.probs.items()))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        rs = np.array(sorted(self.probs))
        return rs, np.array([float(self.probs[r]) for r in rs])


def exact_record_pmf(n_steps: int) -> ExactRecordPmf:
    """Law of the number of upper records of an ``n_steps``-step walk.

    The walk starts at an origin that counts as the first record.  The law is
    the same for every continuous symmetric increment distribution.
    Probabilities are exact ``Fraction`` objects up to 64 steps and correctly
    rounded floats beyond (the binomials are carried as exact integers).
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise InvalidInputError(f"n_steps must be a positive integer, got {n_steps!r}")
    n = int(n_steps)
    if n > MAX_STEPS:
        raise InvalidInputError(f"n_steps above {MAX_STEPS} is not supported")
    exact = n <= EXACT_LIMIT
    probs = {}
    # C(2N - R + 1, N) for R = 1, then downward recursion in the top index
    c = math.comb(2 * n, n)
    for r in range(1, n + 2):
        k = 2 * n - r + 1
        probs[r] = Fraction(c, 1 << k) if exact else c / (1 << k)
        if r <= n:
            c = c * (n - r + 1) // k
    return ExactRecordPmf(n, probs)


def asymptotic_record_law(n_steps: float) -> tuple[float, float]:
    """Large-N Gaussian approximation (mean, variance) of the record number."""
    if not n_steps >= 1:
        raise InvalidInputError("n_steps must be >= 1")
    return math.sqrt(4.0 * n_steps / math.pi), (2.0 - 4.0 / math.pi) * n_steps


# ---------------------------------------------------------------------------
# sigma_N and the single-sample r-statistic
# ---------------------------------------------------------------------------


class SmallSampleWarning(UserWarning):
    """sigma_N was evaluated below N = 10, outside the range of its fit."""


@dataclass(frozen=True)
class SigmaParams:
    a: float = 1.66
    b: float = 0.88
    c: float = 0.5

    def __post_init__(self):
        if not (self.a > 0 and self.b >= 0 and 0 < self.c < 1):
            raise InvalidInputError(f"invalid sigma parameters {self}")


DEFAULT_SIGMA = SigmaParams()


def sigma_n(n: int, params: SigmaParams = DEFAULT_SIGMA) -> float:
    """Standard deviation of the permutation-averaged R0 for a sample of length n."""
    if n < 2:
        raise InvalidInputError(f"sigma_N needs n >= 2, got {n}")
    if n < 10:
        warnings.warn(f"sigma_N at n={n} extrapolates the fit below n=10", SmallSampleWarning, stacklevel=2)
    return math.sqrt((2.0 - 4.0 / math.pi) * n) * params.a * (1.0 - params.b * n ** (-params.c))


def r_statistic(mean_r0: float, n: int, params: SigmaParams = DEFAULT_SIGMA) -> float:
    return mean_r0 / sigma_n(n, params)


# ---------------------------------------------------------------------------
# Statistic variants
# ---------------------------------------------------------------------------


class Variant(str, enum.Enum):
    SINGLE_R0 = "single_r0"
    RZ_PAIRED = "rz_paired"
    RZ_UNPAIRED = "rz_unpaired"
    RPLUS2 = "rplus2"
    RMINUS2 = "rminus2"
    RD = "rd"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise InvalidInputError(f"unknown variant {value!r}; expected one of {names}") from None

    @property
    def two_sample(self) -> bool:
        return self is not Variant.SINGLE_R0

    @property
    def parametric(self) -> bool:
        return self in (Variant.RPLUS2, Variant.RMINUS2, Variant.RD)


def variant_statistics(variant, X, Y, p: int, keys, equalize=EqualizeStrategy.TRIM) -> np.ndarray:
    """Raw statistic per row (x-quantity minus y-quantity for two-sample variants)."""
    variant = Variant.parse(variant)
    if variant is Variant.SINGLE_R0:
        return mean_r0_rows(X, p, keys)
    if variant is Variant.RZ_PAIRED:
        return mean_r0_rows(np.asarray(X) - np.asarray(Y), p, keys)
    if variant is Variant.RZ_UNPAIRED:
        return unpaired_rz_rows(X, Y, p, keys, equalize)
    m = EqualizeStrategy.parse(equalize).length(X.shape[1], Y.shape[1])
    mx = record_means_rows(X, p, keys, m)
    my = record_means_rows(Y, p, keys, m)
    plus = mx[:, 0] - my[:, 0]
    minus = mx[:, 1] - my[:, 1]
    if variant is Variant.RPLUS2:
        return plus
    if variant is Variant.RMINUS2:
        return minus
    return plus - minus


# ---------------------------------------------------------------------------
# Empirical nulls
# ---------------------------------------------------------------------------


class Alternative(str, enum.Enum):
    TWO_SIDED = "two_sided"
    GREATER = "greater"
    LESS = "less"

    @classmethod
    def parse(cls, value) -> "Alternative":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            raise InvalidInputError(f"unknown alternative {value!r}") from None

    def flipped(self) -> "Alternative":
        return {
            Alternative.GREATER: Alternative.LESS,
            Alternative.LESS: Alternative.GREATER,
        }.get(self, self)


def _null_key(variant: Variant, n: int, n_y, equalize):
    if variant is Variant.SINGLE_R0:
        return None, None
    if variant is Variant.RZ_PAIRED:
        return n, None
    equalize = EqualizeStrategy.parse(equalize)
    if n_y == n:
        equalize = EqualizeStrategy.TRIM
    return n_y, equalize


@dataclass(frozen=True)
class NullDistribution:
    n: int
    variant: Variant
    m_draws: int
    p_perms: int
    values: np.ndarray = field(repr=False)
    generator: DistributionSpec = GAUSSIAN
    seed: RngSeed = RngSeed()
    n_y: int | None = None
    equalize: EqualizeStrategy | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != self.m_draws or self.m_draws < 100:
            raise InvalidInputError("null needs m_draws >= 100 values, one per draw")
        if np.any(np.diff(vals) < 0):
            vals = np.sort(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "variant", Variant.parse(self.variant))

    @property
    def symmetric(self) -> bool:
        """Whether the null law is symmetric about zero by construction.

        Negating every value negates single_r0, rz and rd, so a symmetric
        generator suffices for those; with equal lengths, swapping x and y
        negates every two-sample variant whatever the generator.
        """
        if self.variant is not Variant.RPLUS2 and self.variant is not Variant.RMINUS2 \
                and self.generator.is_symmetric:
            return True
        return self.variant.two_sample and self.n_y in (None, self.n)

    def p_value(self, observed: float, alternative="two_sided") -> float:
        return p_value(self, observed, alternative)

    def ensure_matches(self, variant, n: int, n_y: int | None = None, equalize=None,
                       generator: DistributionSpec | None = None) -> None:
        """Raise NullMismatchError unless this table was built for the given key."""
        variant = Variant.parse(variant)
        want = (variant, n, *_null_key(variant, n, n_y, equalize or EqualizeStrategy.TRIM))
        have = (self.variant, self.n, self.n_y, self.equalize)
        if want != have:
            raise NullMismatchError(
                f"null table is for variant={self.variant.value} n={self.n} n_y={self.n_y} "
                f"equalize={getattr(self.equalize, 'value', None)}; requested variant={variant.value} "
                f"n={n} n_y={want[2]} equalize={getattr(want[3], 'value', None)}"
            )
        if generator is not None and variant.parametric and generator != self.generator:
            raise NullMismatchError(
                f"parametric null built from {self.generator.to_json()}, requested {generator.to_json()}"
            )


def build_null(n: int, variant="single_r0", m_draws: int = 10_000, p_perms: int = 10_000,
               generator: DistributionSpec | None = None, seed=None, n_y: int | None = None,
               equalize=EqualizeStrategy.TRIM) -> NullDistribution:
    """Monte Carlo null of ``variant`` for samples of length ``n`` (and ``n_y``).

    Draw k uses the stream ``seed.spawn(k)``: child 0 generates x, child 1
    generates y, child 2 drives the permutations.  The default generator is a
    standard Gaussian; for the record-count variants (rplus2, rminus2, rd) the
    null depends on that choice.
    """
    variant = Variant.parse(variant)
    generator = GAUSSIAN if generator is None else generator
    if generator.theta != 0:
        raise InvalidInputError("null generator must have theta = 0")
    if m_draws < 100:
        raise InvalidInputError("m_draws must be >= 100")
    if p_perms < 1:
        raise InvalidInputError("p_perms must be >= 1")
    if n < 2:
        raise InvalidInputError("n must be >= 2")
    if variant is Variant.RZ_PAIRED:
        n_y = n
    elif variant.two_sample:
        n_y = n if n_y is None else int(n_y)
        if n_y < 1:
            raise InvalidInputError("n_y must be >= 1")
        if EqualizeStrategy.parse(equalize).length(n, n_y) < 2:
            raise InvalidInputError("equalized length must be >= 2")
    n_y, equalize = _null_key(variant, n, n_y, equalize)
    return _build_null_cached(int(n), variant, int(m_draws), int(p_perms), generator,
                              coerce_seed(seed), n_y, equalize)


@functools.lru_cache(maxsize=32)
def _build_null_cached(n, variant, m_draws, p_perms, generator, seed, n_y, equalize):
    draws = [seed.spawn(k) for k in range(m_draws)]
    X = generate_rows(generator, n, [d.spawn(0) for d in draws])
    Y = None
    if variant.two_sample:
        Y = generate_rows(generator, n_y, [d.spawn(1) for d in draws])
    keys = keys_for(d.spawn(2) for d in draws)
    values = variant_statistics(variant, X, Y, p_perms, keys, equalize or EqualizeStrategy.TRIM)
    return NullDistribution(n, variant, m_draws, p_perms, np.sort(values), generator, seed, n_y, equalize)


def p_value(null: NullDistribution, observed: float, alternative="two_sided") -> float:
    """Add-one Monte Carlo p-value; always in (0, 1].

    Two-sided p-values count |value| >= |observed| when the null is symmetric
    (so a sample and its negation get the same p-value), and double the
    smaller tail otherwise.
    """
    alternative = Alternative.parse(alternative)
    vals = null.values
    m = vals.size
    p_greater = (1 + m - int(np.searchsorted(vals, observed, side="left"))) / (m + 1)
    p_less = (1 + int(np.searchsorted(vals, observed, side="right"))) / (m + 1)
    if alternative is Alternative.GREATER:
        return p_greater
    if alternative is Alternative.LESS:
        return p_less
    if null.symmetric:
        return (1 + int(np.count_nonzero(np.abs(vals) >= abs(observed)))) / (m + 1)
    return min(1.0, 2.0 * min(p_greater, p_less))


# ---------------------------------------------------------------------------
# Table files: "# key: value" header lines, then one value per line
# ---------------------------------------------------------------------------


def save_null(null: NullDistribution, path) -> None:
    header = {
        "version": TABLE_VERSION,
        "variant": null.variant.value,
        "n": null.n,
        "n_y": null.n_y,
        "equalize": null.equalize.value if null.equalize else None,
        "m_draws": null.m_draws,
        "p_perms": null.p_perms,
        "generator": null.generator.to_json(),
        "seed": null.seed.seed,
        "stream_id": null.seed.stream_id,
    }
    lines = [f"# {k}: {v}" for k, v in header.items() if v is not None]
    lines += [f"{v:.17g}" for v in null.values]
    Path(path).write_text("\n".join(lines) + "\n")


def load_null(path) -> NullDistribution:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise NullFormatError(f"cannot read null table {path}: {exc}") from exc
    header: dict[str, str] = {}
    values: list[float] = []
    try:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if values:
                    raise NullFormatError(f"line {lineno}: header line after data")
                key, sep, val = line[1:].partition(":")
                if not sep:
                    raise NullFormatError(f"line {lineno}: malformed header {line!r}")
                header[key.strip()] = val.strip()
            else:
                values.append(float(line))
        if header.get("version") != str(TABLE_VERSION):
            raise NullFormatError(f"unsupported null-table version {header.get('version')!r}")
        m_draws = int(header["m_draws"])
        if len(values) != m_draws:
            raise NullFormatError(f"expected {m_draws} values, found {len(values)} (truncated file?)")
        arr = np.array(values)
        if not np.all(np.isfinite(arr)) or np.any(np.diff(arr) < 0):
            raise NullFormatError("null values must be finite and sorted ascending")
        return NullDistribution(
            n=int(header["n"]),
            variant=Variant.parse(header["variant"]),
            m_draws=m_draws,
            p_perms=int(header["p_perms"]),
            values=arr,
            generator=DistributionSpec.from_json(header["generator"]),
            seed=RngSeed(int(header["seed"]), int(header.get("stream_id", 0))),
            n_y=int(header["n_y"]) if "n_y" in header else None,
            equalize=EqualizeStrategy.parse(header["equalize"]) if "equalize" in header else None,
        )
    except NullFormatError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise NullFormatError(f"corrupt null table {path}: {exc}") from exc
