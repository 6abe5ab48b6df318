"""LZ78 incremental parsing, LZ code lengths, and joint parsing of an
(x, y) pair sequence for conditional LZ complexity.

Phrase 0 is always the empty phrase. Phrase ``j >= 1`` is stored as
``(prefix, symbol)``: the index of its longest proper prefix and its last
symbol. When the input ends inside an existing phrase, that trailing piece
is recorded in ``tail`` and is not counted in ``c``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .sources import as_sequence


def index_code_length(j: int, alpha: int) -> int:
    """ceil(log2(j * alpha)): bits for the j-th phrase's (prefix, symbol) index."""
    return (j * alpha - 1).bit_length()


@lru_cache(maxsize=None)
def integer_code_length(i: int) -> int:
    """Shannon code length ceil(-log2 Q(i)) for Q(i) = 6 / (pi^2 i^2)."""
    if i < 1:
        raise ValueError("integer code is defined for i >= 1")
    return math.ceil(math.log2(math.pi ** 2 * i * i / 6))


@dataclass(frozen=True)
class ParseResult:
    alpha: int
    n: int
    phrases: tuple[tuple[int, int], ...]
    tail: int | None

    @property
    def c(self) -> int:
        return len(self.phrases)

    @property
    def last_complete(self) -> bool:
        return self.tail is None

    @property
    def emitted(self) -> int:
        """Phrase count including a trailing incomplete phrase."""
        return self.c + (self.tail is not None)

    @property
    def code_length(self) -> int:
        return sum(index_code_length(j, self.alpha) for j in range(1, self.emitted + 1))

    def phrase(self, j: int) -> tuple[int, ...]:
        out = []
        while j:
            j, s = self.phrases[j - 1]
            out.append(s)
        return tuple(reversed(out))

    def phrase_strings(self) -> list[tuple[int, ...]]:
        return [self.phrase(j) for j in range(1, self.c + 1)]

    def to_dict(self, alphabet=None) -> dict:
        def render(p):
            return alphabet.decode(p) if alphabet else "".join(map(str, p))
        out = {"c": self.c, "code_length": self.code_length, "last_complete": self.last_complete,
               "phrases": [render(p) for p in self.phrase_strings()]}
        if self.tail is not None:
            out["tail"] = render(self.phrase(self.tail))
        return out


def lz78_parse(x) -> ParseResult:
    x = as_sequence(x)
    if len(x) == 0:
        raise ValueError("cannot parse an empty sequence")
    children: dict[tuple[int, int], int] = {}
    phrases: list[tuple[int, int]] = []
    node = 0
    for s in x.symbols:
        nxt = children.get((node, s))
        if nxt is None:
            phrases.append((node, s))
            children[(node, s)] = len(phrases)
            node = 0
        else:
            node = nxt
    return ParseResult(x.alphabet.size, len(x), tuple(phrases), node or None)


def lz_code_length(x) -> int:
    return lz78_parse(x).code_length


def phrase_count(x, include_tail: bool = False) -> int:
    p = lz78_parse(x)
    return p.emitted if include_tail else p.c


@dataclass(frozen=True)
class ConditionalParseResult:
    alpha: int
    n: int
    # joint phrases as (x-part, y-part) strings, complete ones only
    phrases: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    tail: tuple[tuple[int, ...], tuple[int, ...]] | None

    @property
    def c_xy(self) -> int:
        return len(self.phrases)

    @property
    def bucket_counts(self) -> dict[tuple[int, ...], int]:
        """Occurrences of each distinct y-phrase, in order of first appearance."""
        return dict(Counter(yp for _, yp in self.phrases))

    @property
    def c_y(self) -> int:
        return len(self.bucket_counts)

    @property
    def u(self) -> float:
        return math.fsum(c * math.log2(c) for c in self.bucket_counts.values())

    @property
    def conditional_code_length(self) -> int:
        counts: Counter = Counter()
        total = 0
        pieces = list(self.phrases) + ([self.tail] if self.tail is not None else [])
        for _, yp in pieces:
            counts[yp] += 1
            total += index_code_length(counts[yp], self.alpha) + integer_code_length(len(yp))
        return total


def joint_parse(x, y) -> ConditionalParseResult:
    x, y = as_sequence(x), as_sequence(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: |x|={len(x)}, |y|={len(y)}")
    seen: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    phrases = []
    start = 0
    for end in range(1, len(x) + 1):
        piece = (x.symbols[start:end], y.symbols[start:end])
        if piece not in seen:
            seen.add(piece)
            phrases.append(piece)
            start = end
    tail = (x.symbols[start:], y.symbols[start:]) if start < len(x) else None
    return ConditionalParseResult(x.alphabet.size, len(x), tuple(phrases), tail)


def logsum_bound_terms(x, y) -> tuple[float, float]:
    """(sum_l c_l log2 L[y(l)], c_xy log2(n / c_xy)) for the joint parse of (x, y)."""
    p = joint_parse(x, y)
    lhs = math.fsum(c * math.log2(len(yp)) for yp, c in p.bucket_counts.items())
    rhs = p.c_xy * math.log2(p.n / p.c_xy) if p.c_xy else 0.0
    return lhs, rhs


def logsum_bound_check(x, y) -> bool:
    lhs, rhs = logsum_bound_terms(x, y)
    return lhs <= rhs + 1e-12
