"""Empirical distributions, empirical entropies and the universal memoryless
guessing distribution built from them.

Entropies are evaluated from integer counts as ``n log n - sum c log c`` using
a cached table of ``c log2 c`` values, so two sequences with the same counts
always get bit-identical results. Downstream rank ties rely on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sources import Alphabet, Sequence, as_sequence

ENUM_MAX_ALPHABET = 3
ENUM_MAX_N = 14


class GuardExceeded(ValueError):
    """Requested exhaustive enumeration is larger than the documented guard."""


def check_guard(alpha: int, n: int) -> None:
    if alpha ** n > ENUM_MAX_ALPHABET ** ENUM_MAX_N or (alpha > ENUM_MAX_ALPHABET and n > 1):
        raise GuardExceeded(f"enumeration of {alpha}^{n} sequences exceeds the guard "
                            f"(alpha <= {ENUM_MAX_ALPHABET}, n <= {ENUM_MAX_N})")


@lru_cache(maxsize=None)
def clogc(c: int) -> float:
    """c * log2(c) with 0 log 0 = 0."""
    return c * math.log2(c) if c > 0 else 0.0


@dataclass(frozen=True)
class EmpiricalDist:
    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    @classmethod
    def of(cls, x: Sequence) -> "EmpiricalDist":
        counts = [0] * x.alphabet.size
        for s in x.symbols:
            counts[s] += 1
        return cls(tuple(counts))

    def frequencies(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.n

    def n_entropy(self) -> float:
        """n times the entropy in bits."""
        return clogc(self.n) - sum(clogc(c) for c in self.counts)


@dataclass(frozen=True)
class JointEmpiricalDist:
    counts: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(map(sum, self.counts))

    @classmethod
    def of(cls, x: Sequence, y: Sequence) -> "JointEmpiricalDist":
        if len(x) != len(y):
            raise ValueError(f"length mismatch: |x|={len(x)}, |y|={len(y)}")
        table = [[0] * y.alphabet.size for _ in range(x.alphabet.size)]
        for a, b in zip(x.symbols, y.symbols):
            table[a][b] += 1
        return cls(tuple(map(tuple, table)))

    def y_marginal(self) -> EmpiricalDist:
        return EmpiricalDist(tuple(map(sum, zip(*self.counts))))

    def n_entropy(self) -> float:
        return clogc(self.n) - sum(clogc(c) for row in self.counts for c in row)


def empirical_entropy(x) -> float:
    """Empirical entropy of ``x`` in bits per symbol."""
    x = as_sequence(x)
    if len(x) == 0:
        raise ValueError("empirical entropy of an empty sequence is undefined")
    return EmpiricalDist.of(x).n_entropy() / len(x)


def conditional_empirical_entropy(x, y) -> float:
    x, y = as_sequence(x), as_sequence(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: |x|={len(x)}, |y|={len(y)}")
    if len(x) == 0:
        raise ValueError("empirical entropy of an empty sequence is undefined")
    joint = JointEmpiricalDist.of(x, y)
    return (joint.n_entropy() - joint.y_marginal().n_entropy()) / len(x)


def universal_weight(x) -> float:
    """log2 of the unnormalized universal weight, ``-n * H_emp(x)``."""
    x = as_sequence(x)
    if len(x) == 0:
        raise ValueError("universal weight needs n >= 1")
    return -EmpiricalDist.of(x).n_entropy()


def conditional_universal_weight(x, y) -> float:
    x, y = as_sequence(x), as_sequence(y)
    return -len(x) * conditional_empirical_entropy(x, y)


def all_sequences(alpha: int, n: int) -> np.ndarray:
    """Every sequence of X^n as rows, in lexicographic order."""
    check_guard(alpha, n)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    grid = np.indices((alpha,) * n, dtype=np.int8)
    return grid.reshape(n, -1).T.copy()


def batch_counts(X: np.ndarray, alpha: int) -> np.ndarray:
    return np.stack([(X == a).sum(axis=1) for a in range(alpha)], axis=1)


def batch_n_entropy(X: np.ndarray, alpha: int) -> np.ndarray:
    """n * H_emp for each row, via the same count table as the scalar path."""
    n = X.shape[1]
    table = np.array([clogc(c) for c in range(n + 1)])
    return table[n] - table[batch_counts(X, alpha)].sum(axis=1)


@dataclass(frozen=True)
class UniversalTable:
    alphabet: Alphabet
    n: int
    sequences: np.ndarray
    probabilities: np.ndarray
    normalizer: float

    def prob(self, x) -> float:
        x = as_sequence(x, self.alphabet)
        idx = 0
        for s in x.symbols:
            idx = idx * self.alphabet.size + s
        return float(self.probabilities[idx])


def universal_dist_exact(alphabet: Alphabet, n: int) -> UniversalTable:
    """Normalized universal distribution over X^n by full enumeration."""
    if n < 1:
        raise ValueError("n must be >= 1")
    X = all_sequences(alphabet.size, n)
    w = np.exp2(-batch_n_entropy(X, alphabet.size))
    z = float(w.sum())
    return UniversalTable(alphabet, n, X, w / z, z)


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def universal_normalizer(alpha: int, n: int) -> float:
    """sum over X^n of 2^{-n H_emp(x)}, summed type class by type class."""
    return math.fsum(size * 2.0 ** -(clogc(n) - sum(clogc(c) for c in counts))
                     for counts, size in type_classes(alpha, n))


def type_classes(alpha: int, n: int):
    """Yield (count vector, class size) for every type of length n."""
    for counts in _compositions(n, alpha):
        size = math.factorial(n)
        for c in counts:
            size //= math.factorial(c)
        yield counts, size

