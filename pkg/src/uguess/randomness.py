"""Randomness sources consumed by the samplers.

Samplers only ever ask for fair bits or for an index drawn in proportion to
integer weights. Keeping the interface that narrow lets tests replace the
generator with an exhaustive enumerator and recover induced laws exactly.
"""

from __future__ import annotations

import numpy as np


class RandomSource:
    def __init__(self, rng: np.random.Generator | int | None = None):
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        self.rng = rng

    def bits(self, k: int) -> int:
        """k fair bits packed MSB-first into an int."""
        if k <= 0:
            return 0
        return int(self.rng.integers(0, 1 << k))

    def choice(self, weights) -> int:
        total = sum(weights)
        u = int(self.rng.integers(0, total))
        for i, w in enumerate(weights):
            if u < w:
                return i
            u -= w
        raise AssertionError("unreachable: weights exhausted")


def as_random_source(rng) -> RandomSource:
    if isinstance(rng, RandomSource) or (hasattr(rng, "bits") and hasattr(rng, "choice")):
        return rng
    return RandomSource(rng)


def spawn_generators(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child generators derived from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
