"""Sequential sampling from the Dirichlet(1/2) (Krichevsky-Trofimov) mixture of
memoryless sources, with an optional per-side-information-letter variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .randomness import as_random_source
from .sources import Alphabet, Sequence, as_sequence


@dataclass
class MixtureState:
    """Counts of the symbols emitted so far.

    With side information the counts are kept per SI letter; buckets are
    created the first time an SI letter shows up.
    """

    alpha: int
    counts: list[int] = field(default=None)
    buckets: dict[int, list[int]] = field(default_factory=dict)
    t: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = [0] * self.alpha

    def update(self, symbol: int, si: int | None = None) -> None:
        self.counts[symbol] += 1
        if si is not None:
            self.buckets.setdefault(si, [0] * self.alpha)[symbol] += 1
        self.t += 1

    def bucket(self, si: int) -> list[int]:
        return self.buckets.get(si) or [0] * self.alpha


def kt_conditional(state: MixtureState, symbol: int) -> float:
    return (state.counts[symbol] + 0.5) / (state.t + state.alpha / 2)


def kt_conditional_si(state: MixtureState, symbol: int, si: int) -> float:
    """Add-half estimate of ``symbol`` using only past positions with SI letter ``si``."""
    bucket = state.bucket(si)
    return (bucket[symbol] + 0.5) / (sum(bucket) + state.alpha / 2)


def kt_sequence_log_prob(x) -> float:
    """log2 of the mixture probability, accumulated one conditional at a time."""
    x = as_sequence(x)
    state = MixtureState(x.alphabet.size)
    logp = 0.0
    for s in x.symbols:
        logp += math.log2(kt_conditional(state, s))
        state.update(s)
    return logp


def kt_closed_form_log_prob(counts) -> float:
    """log2 of the mixture probability from the count vector via log-gamma."""
    alpha = len(counts)
    n = sum(counts)
    ln = (math.lgamma(alpha / 2) + sum(math.lgamma(c + 0.5) for c in counts)
          - (alpha / 2) * math.log(math.pi) - math.lgamma(n + alpha / 2))
    return ln / math.log(2)


def kt_si_log_prob(x, y) -> float:
    x, y = as_sequence(x), as_sequence(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: |x|={len(x)}, |y|={len(y)}")
    state = MixtureState(x.alphabet.size)
    logp = 0.0
    for a, b in zip(x.symbols, y.symbols):
        logp += math.log2(kt_conditional_si(state, a, b))
        state.update(a, b)
    return logp


class KTSampler:
    """One guessing agent drawing i.i.d. guesses from the mixture."""

    def __init__(self, alphabet: Alphabet, rng):
        self.alphabet = alphabet
        self.source = as_random_source(rng)

    def _draw(self, counts: list[int]) -> int:
        # weights c + 1/2, doubled to stay integral
        return self.source.choice([2 * c + 1 for c in counts])

    def sample(self, n: int) -> Sequence:
        if n < 1:
            raise ValueError("n must be >= 1")
        alpha = self.alphabet.size
        counts = [0] * alpha
        out = []
        for _ in range(n):
            s = self._draw(counts)
            counts[s] += 1
            out.append(s)
        return Sequence(self.alphabet, tuple(out))


class KTSISampler(KTSampler):
    """Mixture sampler that keeps separate counts for each side-information letter."""

    def sample(self, y) -> Sequence:
        y = as_sequence(y)
        if len(y) < 1:
            raise ValueError("side information must be nonempty")
        alpha = self.alphabet.size
        buckets: dict[int, list[int]] = {}
        out = []
        for b in y.symbols:
            counts = buckets.setdefault(b, [0] * alpha)
            s = self._draw(counts)
            counts[s] += 1
            out.append(s)
        return Sequence(self.alphabet, tuple(out))


def kt_sample(n: int, rng, alphabet: Alphabet | None = None) -> Sequence:
    return KTSampler(alphabet or Alphabet.binary(), rng).sample(n)
