"""Sample generators parameterized by signal-to-noise ratio.

Every family is shifted and scaled so that variates have mean ``theta * sigma``
and standard deviation ``sigma``:

========== ==========================================================
gaussian   sigma * Z + theta * sigma
uniform    sigma * sqrt(12) * (U - 1/2) + theta * sigma
student_t  sigma * T_nu * sqrt((nu - 2) / nu) + theta * sigma, nu > 2
exponential sigma * (E - 1) + theta * sigma   (skewed on purpose)
========== ==========================================================
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError
from .rng import RngSeed, coerce_seed

FAMILIES = ("gaussian", "uniform", "student_t", "exponential")


@dataclass(frozen=True)
class DistributionSpec:
    family: str = "gaussian"
    theta: float = 0.0
    sigma: float = 1.0
    nu: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not (math.isfinite(self.theta) and math.isfinite(self.sigma)) or self.sigma <= 0:
            raise InvalidInputError("theta must be finite and sigma finite and > 0")
        if self.family == "student_t":
            if self.nu is None or not self.nu > 2:
                raise InvalidInputError("student_t needs nu > 2 (unit variance is undefined otherwise)")
            object.__setattr__(self, "nu", float(self.nu))
        elif self.nu is not None:
            object.__setattr__(self, "nu", None)

    @property
    def is_symmetric(self) -> bool:
        return self.family != "exponential"

    def with_theta(self, theta: float) -> "DistributionSpec":
        return DistributionSpec(self.family, theta, self.sigma, self.nu)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["nu"] is None:
            del d["nu"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        unknown = set(d) - {"family", "theta", "sigma", "nu"}
        if unknown:
            raise InvalidInputError(f"unknown distribution fields: {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "DistributionSpec":
        return cls.from_dict(json.loads(text))


GAUSSIAN = DistributionSpec()


def _standard(family: str, nu, n: int, gen: np.random.Generator) -> np.ndarray:
    if family == "gaussian":
        return gen.standard_normal(n)
    if family == "uniform":
        return math.sqrt(12.0) * (gen.random(n) - 0.5)
    if family == "student_t":
        return gen.standard_t(nu, n) * math.sqrt((nu - 2.0) / nu)
    return gen.standard_exponential(n) - 1.0


def generate(spec: DistributionSpec, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. variates from ``spec``, reproducible from ``seed``."""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n!r}")
    gen = coerce_seed(seed).generator()
    z = _standard(spec.family, spec.nu, int(n), gen)
    return spec.sigma * z + spec.theta * spec.sigma


def generate_rows(spec: DistributionSpec, n: int, seeds: list[RngSeed]) -> np.ndarray:
    """One sample per seed, stacked as rows (row k == generate(spec, n, seeds[k]))."""
    out = np.empty((len(seeds), int(n)))
    for k, s in enumerate(seeds):
        out[k] = generate(spec, n, s)
    return out
