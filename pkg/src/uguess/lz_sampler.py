"""Exact samplers for the universal Lempel-Ziv guessing distribution.

Three samplers live here:

* ``LZTreeSampler`` grows an alpha-ary phrase tree and walks it from the root,
  picking children in proportion to the number of leaves below them. Every
  walk that ends on a leaf is a brand new LZ78 phrase.
* ``LZBitsSampler`` feeds fair bits into an LZ78 decoder whose phrase indices
  are coded on complete binary trees, so every bit stream decodes.
* ``LZCondSampler`` does the same for the conditional LZ decoder that knows the
  side-information sequence ``y``. A phrase is coded as a phrase length (on a
  pruned and shortened Shannon code for ``Q(i) = 6 / (pi^2 i^2)``) followed by
  a (prefix, symbol) index.

Each sampler has an exact log-probability counterpart. The bit-fed decoders
can emit a phrase that repeats an earlier one, so the same output may be
reachable through several phrase decompositions; the exact probabilities sum
over all of them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .lz_parse import integer_code_length, lz78_parse
from .randomness import as_random_source
from .sources import Alphabet, Sequence, as_sequence

SUCCESS = None  # terminal marker in branch lists


def _leaf_prob(depth: int, exact: bool):
    return Fraction(1, 1 << depth) if exact else 2.0 ** -depth


def log2_fraction(p: Fraction) -> float:
    if p <= 0:
        return float("-inf")
    return math.log2(p.numerator) - math.log2(p.denominator)


# ---------------------------------------------------------------------------
# Trees


class CompleteBinaryCodeTree:
    """Complete binary tree with ``m`` leaves at depths ``L - 1`` and ``L``.

    Built from the full tree with ``2^(L-1)`` leaves by splitting the leftmost
    ``m - 2^(L-1)`` of them. Leaves are numbered left to right.
    """

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("a code tree needs at least one leaf")
        self.m = m
        self.L = (m - 1).bit_length()
        self.split = m - (1 << self.L - 1) if self.L else 0

    def depth(self, k: int) -> int:
        if not 0 <= k < self.m:
            raise IndexError(k)
        if self.L == 0:
            return 0
        return self.L if k < 2 * self.split else self.L - 1

    def codeword(self, k: int) -> str:
        d = self.depth(k)
        v = k if d == self.L else k - self.split
        return format(v, f"0{d}b") if d else ""

    def leaf_depths(self) -> list[int]:
        return [self.depth(k) for k in range(self.m)]

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 1 << d) for d in self.leaf_depths()), Fraction(0))

    def sample(self, source) -> int:
        if self.L == 0:
            return 0
        v = source.bits(self.L - 1)
        if v < self.split:
            return 2 * v + source.bits(1)
        return v + self.split


@lru_cache(maxsize=None)
def code_tree(m: int) -> CompleteBinaryCodeTree:
    return CompleteBinaryCodeTree(m)


_canonical: list[int] = [0, 0]  # canonical Shannon codewords, index 0 unused


def shannon_codeword(i: int) -> str:
    """Canonical prefix codeword of length integer_code_length(i) for integer i."""
    while len(_canonical) <= i:
        j = len(_canonical)
        prev = _canonical[j - 1]
        _canonical.append((prev + 1) << (integer_code_length(j) - integer_code_length(j - 1)))
    return format(_canonical[i], f"0{integer_code_length(i)}b")


class IntegerCodeTree:
    """Shannon-code tree for ``Q(i)`` restricted to ``valid`` values of ``i``.

    Leaves for invalid values are pruned, then every node with a single child
    is collapsed into that child, which leaves a complete tree. Leaves are
    ints, internal nodes are (left, right) pairs.
    """

    def __init__(self, valid):
        self.valid = tuple(sorted(set(valid)))
        if not self.valid:
            raise ValueError("no valid values for the integer code")
        trie: dict = {}
        for i in self.valid:
            node = trie
            word = shannon_codeword(i)
            for b in word[:-1]:
                node = node.setdefault(b, {})
            node[word[-1]] = i
        self.root = self._shorten(trie)
        self.depths: dict[int, int] = {}
        self._collect(self.root, 0)

    @classmethod
    def _shorten(cls, node):
        if isinstance(node, int):
            return node
        kids = [cls._shorten(node[b]) for b in "01" if b in node]
        return kids[0] if len(kids) == 1 else tuple(kids)

    def _collect(self, node, d):
        if isinstance(node, int):
            self.depths[node] = d
        else:
            self._collect(node[0], d + 1)
            self._collect(node[1], d + 1)

    def depth(self, i: int) -> int:
        return self.depths[i]

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 1 << d) for d in self.depths.values()), Fraction(0))

    def is_complete(self) -> bool:
        def ok(node):
            return isinstance(node, int) or (len(node) == 2 and ok(node[0]) and ok(node[1]))
        return ok(self.root)

    def sample(self, source) -> int:
        node = self.root
        while not isinstance(node, int):
            node = node[source.bits(1)]
        return node


@lru_cache(maxsize=4096)
def integer_tree(valid: tuple[int, ...]) -> IntegerCodeTree:
    return IntegerCodeTree(valid)


class PhraseTree:
    """Growing alpha-ary tree; a node's weight is the number of leaves below it."""

    def __init__(self, alpha: int):
        self.alpha = alpha
        self.children: list[list[int] | None] = [None]
        self.parent: list[int] = [-1]
        self.weight: list[int] = [1]
        self.births = -1
        self.birth(0)

    def is_leaf(self, node: int) -> bool:
        return self.children[node] is None

    def birth(self, node: int) -> None:
        """Turn leaf ``node`` into an internal node with alpha fresh leaves."""
        if not self.is_leaf(node):
            raise ValueError(f"node {node} is not a leaf")
        start = len(self.parent)
        self.children[node] = list(range(start, start + self.alpha))
        for _ in range(self.alpha):
            self.children.append(None)
            self.parent.append(node)
            self.weight.append(1)
        gain = self.alpha - 1
        while node >= 0:
            self.weight[node] += gain
            node = self.parent[node]
        self.births += 1

    @property
    def leaf_count(self) -> int:
        return self.weight[0]

    def leaves(self) -> list[int]:
        return [v for v in range(len(self.parent)) if self.is_leaf(v)]

    def path_probability(self, node: int) -> Fraction:
        """Product of branch probabilities from the root down to ``node``."""
        p = Fraction(1)
        while self.parent[node] >= 0:
            p *= Fraction(self.weight[node], self.weight[self.parent[node]])
            node = self.parent[node]
        return p

    def leaf_probabilities(self) -> dict[int, Fraction]:
        return {v: self.path_probability(v) for v in self.leaves()}


# ---------------------------------------------------------------------------
# Algorithm 1: walks on the phrase tree


class LZTreeSampler:
    def __init__(self, alphabet: Alphabet, rng):
        self.alphabet = alphabet
        self.source = as_random_source(rng)

    def sample(self, n: int) -> Sequence:
        if n < 1:
            raise ValueError("n must be >= 1")
        tree = PhraseTree(self.alphabet.size)
        out: list[int] = []
        node = 0
        while len(out) < n:
            kids = tree.children[node]
            a = self.source.choice([tree.weight[k] for k in kids])
            out.append(a)
            node = kids[a]
            if tree.is_leaf(node):
                tree.birth(node)
                node = 0
        return Sequence(self.alphabet, tuple(out))


def alg1_sample(n: int, rng, alphabet: Alphabet | None = None) -> Sequence:
    return LZTreeSampler(alphabet or Alphabet.binary(), rng).sample(n)


def alg1_prob(x) -> Fraction:
    """Exact probability that the tree-walk sampler emits ``x``."""
    x = as_sequence(x)
    parse = lz78_parse(x)
    alpha = parse.alpha
    p = Fraction(1)
    for i in range(parse.c):
        p /= alpha + i * (alpha - 1)
    if parse.tail is not None:
        size = [1] * (parse.c + 1)
        for j in range(parse.c, 0, -1):
            size[parse.phrases[j - 1][0]] += size[j]
        p *= Fraction(1 + (alpha - 1) * size[parse.tail], alpha + parse.c * (alpha - 1))
    return p


def alg1_log_prob(x) -> float:
    """log2 probability of ``x`` under the tree-walk sampler, without rationals."""
    x = as_sequence(x)
    parse = lz78_parse(x)
    alpha = parse.alpha
    logp = -math.fsum(math.log2(alpha + i * (alpha - 1)) for i in range(parse.c))
    if parse.tail is not None:
        size = [1] * (parse.c + 1)
        for j in range(parse.c, 0, -1):
            size[parse.phrases[j - 1][0]] += size[j]
        logp += math.log2(1 + (alpha - 1) * size[parse.tail]) - math.log2(
            alpha + parse.c * (alpha - 1))
    return logp


def alg1_step_probabilities(x) -> list[Fraction]:
    """Per-symbol branch probabilities of the tree walk that emits ``x``."""
    x = as_sequence(x)
    tree = PhraseTree(x.alphabet.size)
    out = []
    node = 0
    for a in x.symbols:
        child = tree.children[node][a]
        out.append(Fraction(tree.weight[child], tree.weight[node]))
        node = child
        if tree.is_leaf(node):
            tree.birth(node)
            node = 0
    return out


# ---------------------------------------------------------------------------
# Algorithm 2: fair bits into the LZ78 decoder


class LZBitsSampler:
    def __init__(self, alphabet: Alphabet, rng):
        self.alphabet = alphabet
        self.source = as_random_source(rng)

    def sample(self, n: int) -> Sequence:
        if n < 1:
            raise ValueError("n must be >= 1")
        alpha = self.alphabet.size
        dictionary: list[tuple[int, ...]] = [()]
        out: list[int] = []
        while len(out) < n:
            k = code_tree(len(dictionary) * alpha).sample(self.source)
            phrase = dictionary[k // alpha] + (k % alpha,)
            dictionary.append(phrase)
            out.extend(phrase)
        return Sequence(self.alphabet, tuple(out[:n]))


def alg2_sample(n: int, rng, alphabet: Alphabet | None = None) -> Sequence:
    return LZBitsSampler(alphabet or Alphabet.binary(), rng).sample(n)


def alg2_branches(x, exact: bool = True):
    """Decoder states consistent with ``x`` for the bit-fed sampler.

    Returns ``(start, branches)`` where ``branches(state)`` lists
    ``(probability, next_state)`` pairs, ``next_state`` being ``SUCCESS`` once
    all of ``x`` has been emitted. Outcomes inconsistent with ``x`` are left out.
    Probabilities are Fractions when ``exact`` is set, floats otherwise.
    """
    x = as_sequence(x)
    xs, n, alpha = x.symbols, len(x), x.alphabet.size

    def branches(state):
        p, dictionary = state
        rest = xs[p:]
        tree = code_tree(len(dictionary) * alpha)
        out = []
        for i, base in enumerate(dictionary):
            if len(base) >= len(rest):
                if base[:len(rest)] == rest:
                    out.extend((_leaf_prob(tree.depth(i * alpha + a), exact), SUCCESS)
                               for a in range(alpha))
                continue
            if rest[:len(base)] != base:
                continue
            a = rest[len(base)]
            k = i * alpha + a
            end = p + len(base) + 1
            nxt = SUCCESS if end == n else (end, dictionary + (base + (a,),))
            out.append((_leaf_prob(tree.depth(k), exact), nxt))
        return out

    return (0, ((),)), branches


def path_sum(start, branches) -> Fraction:
    """Total probability of reaching SUCCESS from ``start``."""
    memo: dict = {}

    def visit(state):
        hit = memo.get(state)
        if hit is not None:
            return hit
        total = Fraction(0)
        for p, nxt in branches(state):
            total += p if nxt is SUCCESS else p * visit(nxt)
        memo[state] = total
        return total

    return visit(start)


def alg2_prob(x) -> Fraction:
    x = as_sequence(x)
    if len(x) < 1:
        raise ValueError("n must be >= 1")
    return path_sum(*alg2_branches(x))


def alg2_log_prob(x) -> float:
    return log2_fraction(alg2_prob(x))


def alg2_parse_path_log_prob(x) -> float:
    """log2 probability of the bit path that follows x's own LZ78 parse only."""
    x = as_sequence(x)
    parse = lz78_parse(x)
    alpha = parse.alpha
    total = 0
    for j, (prefix, a) in enumerate(parse.phrases, start=1):
        total += code_tree(j * alpha).depth(prefix * alpha + a)
    if parse.tail is None:
        return float(-total)
    # the truncated last phrase: any leaf whose decoded phrase starts with the tail
    tail = parse.phrase(parse.tail)
    tree = code_tree((parse.c + 1) * alpha)
    mass = Fraction(0)
    for i, base in enumerate([()] + parse.phrase_strings()):
        for a in range(alpha):
            if (base + (a,))[:len(tail)] == tail:
                mass += Fraction(1, 1 << tree.depth(i * alpha + a))
    return -total + log2_fraction(mass)


# ---------------------------------------------------------------------------
# Conditional sampler: fair bits into the conditional LZ decoder


def valid_lengths(y: tuple[int, ...], p: int, y_parts) -> tuple[int, ...]:
    """Phrase lengths the conditional decoder may produce at position ``p``.

    Length 1 is always allowed; a longer length l is allowed when the first
    l - 1 symbols of the y window are the y-part of an earlier joint phrase.
    """
    rest = len(y) - p
    return tuple(l for l in range(1, rest + 1) if l == 1 or y[p:p + l - 1] in y_parts)


def cond_bases(dictionary, window_prefix: tuple[int, ...]) -> list[tuple[int, ...]]:
    """x-parts that may prefix a new x-phrase whose y-window starts with ``window_prefix``."""
    if not window_prefix:
        return [()]
    return [xp for xp, yp in dictionary if yp == window_prefix]


class LZCondSampler:
    def __init__(self, alphabet: Alphabet, rng):
        self.alphabet = alphabet
        self.source = as_random_source(rng)

    def sample(self, y) -> Sequence:
        y = as_sequence(y)
        ys = y.symbols
        if not ys:
            raise ValueError("side information must be nonempty")
        alpha = self.alphabet.size
        dictionary: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        y_parts: set[tuple[int, ...]] = set()
        out: list[int] = []
        while len(out) < len(ys):
            p = len(out)
            length = integer_tree(valid_lengths(ys, p, y_parts)).sample(self.source)
            bases = cond_bases(dictionary, ys[p:p + length - 1])
            k = code_tree(len(bases) * alpha).sample(self.source)
            phrase = bases[k // alpha] + (k % alpha,)
            dictionary.append((phrase, ys[p:p + length]))
            y_parts.add(ys[p:p + length])
            out.extend(phrase)
        return Sequence(self.alphabet, tuple(out))


def cond_sample(y, rng, alphabet: Alphabet | None = None) -> Sequence:
    return LZCondSampler(alphabet or Alphabet.binary(), rng).sample(y)


def cond_branches(x, y, exact: bool = True):
    x, y = as_sequence(x), as_sequence(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: |x|={len(x)}, |y|={len(y)}")
    xs, ys, n, alpha = x.symbols, y.symbols, len(x), x.alphabet.size

    def branches(state):
        p, dictionary = state
        y_parts = {yp for _, yp in dictionary}
        ltree = integer_tree(valid_lengths(ys, p, y_parts))
        out = []
        for length in ltree.valid:
            target = xs[p:p + length]
            bases = cond_bases(dictionary, ys[p:p + length - 1])
            itree = code_tree(len(bases) * alpha)
            for i, base in enumerate(bases):
                if base != target[:-1]:
                    continue
                k = i * alpha + target[-1]
                prob = _leaf_prob(ltree.depth(length) + itree.depth(k), exact)
                end = p + length
                nxt = SUCCESS if end == n else (end, dictionary + ((target, ys[p:end]),))
                out.append((prob, nxt))
        return out

    return (0, ()), branches


def cond_prob(x, y) -> Fraction:
    x = as_sequence(x)
    if len(x) < 1:
        raise ValueError("n must be >= 1")
    return path_sum(*cond_branches(x, y))


def cond_log_prob(x, y) -> float:
    return log2_fraction(cond_prob(x, y))
