import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_lz78
from uguess.empirical import all_sequences
from uguess.guesswork import guessing_ranks, ordering_keys
from uguess.lz_parse import (index_code_length, integer_code_length, joint_parse, logsum_bound_check,
                             logsum_bound_terms, lz78_parse, lz_code_length, phrase_count)
from uguess.sources import Alphabet, Sequence


def strings(p):
    return ["".join(map(str, ph)) for ph in p.phrase_strings()]


def test_reference_parse():
    p = lz78_parse("1011010100010")
    assert strings(p) == ["1", "0", "11", "01", "010", "00", "10"]
    assert p.c == 7 and p.last_complete
    assert lz_code_length("1011010100010") == 1 + 2 + 3 + 3 + 4 + 4 + 4 == 21


def test_incomplete_tail():
    p = lz78_parse("00")
    assert strings(p) == ["0"] and p.c == 1 and not p.last_complete
    assert p.phrase(p.tail) == (0,)
    assert lz78_parse("0").c == 1
    assert lz_code_length("0") == 1
    assert phrase_count("00", include_tail=True) == 2


def test_code_lengths():
    assert [index_code_length(j, 2) for j in range(1, 6)] == [1, 2, 3, 3, 4]
    assert index_code_length(3, 3) == math.ceil(math.log2(9))
    for i in range(1, 200):
        assert integer_code_length(i) == math.ceil(-math.log2(6 / (math.pi ** 2 * i * i)))


def test_matches_naive_parser():
    for n in range(1, 13):
        for x in itertools.product("01", repeat=n):
            s = "".join(x)
            phrases, tail = naive_lz78(s)
            p = lz78_parse(s)
            assert strings(p) == phrases
            assert (p.tail is None) == (tail is None)
            if tail is not None:
                assert "".join(map(str, p.phrase(p.tail))) == tail


def test_code_is_uniquely_decodable_by_count():
    counts = Counter(lz_code_length(list(x)) for x in itertools.product((0, 1), repeat=10))
    for length, k in counts.items():
        assert k <= 2 ** length


@pytest.mark.slow
def test_rank_below_code_length_bound():
    for n in range(1, 15):
        X = all_sequences(2, n)
        ranks = guessing_ranks(ordering_keys(X, Alphabet.binary(), "lz"))
        lz = np.array([lz_code_length(Sequence(Alphabet.binary(), tuple(int(v) for v in r))) for r in X])
        assert np.all(ranks < 2.0 ** (lz + 1))


def bucket_oracle(x, y):
    """Joint phrases grouped by y-part, counted directly from the pair parse."""
    seen, start, buckets = set(), 0, Counter()
    for end in range(1, len(x) + 1):
        piece = (x[start:end], y[start:end])
        if piece not in seen:
            seen.add(piece)
            buckets[piece[1]] += 1
            start = end
    return buckets


def test_joint_parse_examples():
    p = joint_parse("0110", "0110")
    assert all(c == 1 for c in p.bucket_counts.values()) and p.u == 0
    p = joint_parse("01", "01")
    assert p.u == 0
    for x in itertools.product("01", repeat=9):
        s = "".join(x)
        p = joint_parse(s, "0" * 9)
        b = bucket_oracle(s, "0" * 9)
        assert p.u == pytest.approx(sum(c * math.log2(c) for c in b.values()))
        assert sum(p.bucket_counts.values()) == p.c_xy
    with pytest.raises(ValueError):
        joint_parse("01", "0")


def test_conditional_code_length_hand():
    # pairs: (0,0) | (1,0)(... y=00 ...) -> x=0101, y=0000 parse: (0,0) (1,0) (01,00)
    p = joint_parse("0101", "0000")
    assert p.phrases == (((0,), (0,)), ((1,), (0,)), ((0, 1), (0, 0)))
    assert p.c_xy == 3 and p.c_y == 2 and p.u == 2.0
    want = (index_code_length(1, 2) + integer_code_length(1) + index_code_length(2, 2)
            + integer_code_length(1) + index_code_length(1, 2) + integer_code_length(2))
    assert p.conditional_code_length == want


def test_logsum_bound():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = rng.integers(0, 2, 200).tolist()
        y = rng.integers(0, 2, 200).tolist()
        assert logsum_bound_check(x, y)
        assert logsum_bound_check(x, [0] * 200)
    lhs, rhs = logsum_bound_terms("01", "01")
    assert lhs == 0 and rhs == 0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=60), st.integers(0, 2))
def test_parse_properties(xs, extra):
    ab = Alphabet.of("abc")
    x = Sequence(ab, tuple(xs))
    p = lz78_parse(x)
    whole = [s for ph in p.phrase_strings() for s in ph] + (list(p.phrase(p.tail)) if p.tail else [])
    assert whole == xs
    assert len(set(p.phrase_strings())) == p.c
    for j, (prefix, _) in enumerate(p.phrases, start=1):
        assert prefix < j
    assert lz78_parse(Sequence(ab, tuple(xs) + (extra,))).c >= p.c
    assert lz78_parse(x) == p
