"""Seeded, platform-stable random streams.

Two layers are used:

* ``RngSeed`` names a stream by ``(seed, stream_id)``.  Child streams are
  derived with :meth:`RngSeed.spawn`, a SplitMix64 hash of the parent stream id
  and the child index, so arbitrary trees of independent streams can be built
  without coordination.
* Variates for *data* come from numpy's ``Philox`` bit generator keyed through
  ``SeedSequence(seed, spawn_key=(stream_id,))``; permutation kernels receive a
  single 64-bit key from the same ``SeedSequence`` and run a counter-based
  SplitMix64 generator (see ``rstats._kernels``), one substream per round.

Both algorithms are fixed and documented by numpy, so results are identical on
every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngSeed:
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer, got {v!r}")
            if not 0 <= int(v) <= MASK64:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer")
            object.__setattr__(self, name, int(v))

    def spawn(self, index: int) -> "RngSeed":
        """Child stream ``index`` of this stream (same seed, hashed stream id)."""
        child = mix64(self.stream_id + (int(index) + 1) * GOLDEN64)
        return RngSeed(self.seed, child)

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def key(self) -> np.uint64:
        """64-bit key for the counter-based permutation kernels."""
        return self.seed_sequence().generate_state(1, np.uint64)[0]

    def __str__(self) -> str:
        return f"{self.seed}:{self.stream_id}"

    @classmethod
    def parse(cls, text: str) -> "RngSeed":
        seed, _, stream = str(text).strip().partition(":")
        return cls(int(seed), int(stream) if stream else 0)


def coerce_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    if seed is None:
        return RngSeed()
    if isinstance(seed, str):
        return RngSeed.parse(seed)
    return RngSeed(int(seed))


def keys_for(seeds) -> np.ndarray:
    return np.array([s.key() for s in seeds], dtype=np.uint64)
