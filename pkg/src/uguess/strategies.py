"""Registry of randomized guessing strategies.

A strategy bundles a sampler factory, the exact probability it assigns to a
guess, and a match model: the chain or DAG of sampler states that stay
consistent with one fixed target sequence. The attack simulator walks the
match model instead of materializing whole guesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import kt_sampler, lz_sampler
from .lz_sampler import SUCCESS
from .sources import Alphabet, as_sequence


@dataclass(frozen=True)
class Strategy:
    name: str
    needs_si: bool
    make_sampler: Callable
    log_prob: Callable
    match_model: Callable

    def guesser(self, alphabet: Alphabet, rng, n: int | None = None, y=None):
        """Zero-argument callable producing one fresh guess per call."""
        inner = self.make_sampler(alphabet, rng)
        if self.needs_si:
            if y is None:
                raise ValueError(f"strategy {self.name!r} needs side information")
            y = as_sequence(y)
            return lambda: inner.sample(y)
        if n is None:
            raise ValueError("guess length n is required")
        return lambda: inner.sample(n)


def _chain_model(probs: list[Fraction]):
    """Match model for samplers that emit one symbol per random draw."""
    n = len(probs)
    probs = [float(p) for p in probs]

    def branches(p):
        return [(probs[p], SUCCESS if p + 1 == n else p + 1)]

    return 0, branches


def _kt_steps(x) -> list[Fraction]:
    x = as_sequence(x)
    alpha = x.alphabet.size
    counts = [0] * alpha
    out = []
    for t, s in enumerate(x.symbols):
        out.append(Fraction(2 * counts[s] + 1, 2 * t + alpha))
        counts[s] += 1
    return out


def _kt_si_steps(x, y) -> list[Fraction]:
    x, y = as_sequence(x), as_sequence(y)
    alpha = x.alphabet.size
    buckets: dict[int, list[int]] = {}
    out = []
    for a, b in zip(x.symbols, y.symbols):
        counts = buckets.setdefault(b, [0] * alpha)
        out.append(Fraction(2 * counts[a] + 1, 2 * sum(counts) + alpha))
        counts[a] += 1
    return out


STRATEGIES: dict[str, Strategy] = {
    "kt": Strategy(
        "kt", False, kt_sampler.KTSampler,
        lambda x, y=None: kt_sampler.kt_sequence_log_prob(x),
        lambda x, y=None: _chain_model(_kt_steps(x))),
    "kt-si": Strategy(
        "kt-si", True, kt_sampler.KTSISampler,
        lambda x, y: kt_sampler.kt_si_log_prob(x, y),
        lambda x, y: _chain_model(_kt_si_steps(x, y))),
    "lz-tree": Strategy(
        "lz-tree", False, lz_sampler.LZTreeSampler,
        lambda x, y=None: lz_sampler.alg1_log_prob(x),
        lambda x, y=None: _chain_model(lz_sampler.alg1_step_probabilities(x))),
    "lz-bits": Strategy(
        "lz-bits", False, lz_sampler.LZBitsSampler,
        lambda x, y=None: lz_sampler.alg2_log_prob(x),
        lambda x, y=None: lz_sampler.alg2_branches(x, exact=False)),
    "lz-cond": Strategy(
        "lz-cond", True, lz_sampler.LZCondSampler,
        lambda x, y: lz_sampler.cond_log_prob(x, y),
        lambda x, y: lz_sampler.cond_branches(x, y, exact=False)),
}


def get_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
