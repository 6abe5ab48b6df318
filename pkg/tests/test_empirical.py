import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_max_product_prob
from uguess.empirical import (GuardExceeded, all_sequences, batch_n_entropy, check_guard,
                              conditional_empirical_entropy, conditional_universal_weight,
                              empirical_entropy, universal_dist_exact, universal_normalizer,
                              universal_weight)
from uguess.sources import Alphabet, HiddenMarkovSource


def test_entropy_examples():
    assert empirical_entropy("0000") == 0.0
    assert empirical_entropy("0011") == 1.0
    h = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert empirical_entropy("0001") == pytest.approx(h, abs=1e-15)
    with pytest.raises(ValueError):
        empirical_entropy("")


def test_conditional_entropy_examples():
    assert conditional_empirical_entropy("0110", "0000") == pytest.approx(empirical_entropy("0110"))
    assert conditional_empirical_entropy("0110", "0110") == pytest.approx(0.0, abs=1e-15)
    # x=0101, y=0011: joint pairs 00,10,01,11 each once; y is uniform
    assert conditional_empirical_entropy("0101", "0011") == pytest.approx(2.0 - 1.0)
    assert conditional_universal_weight("0101", "0011") == pytest.approx(-4.0)
    assert conditional_universal_weight("0110", "1111") == pytest.approx(universal_weight("0110"))
    assert conditional_universal_weight("0110", "0110") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        conditional_empirical_entropy("01", "0")


def test_universal_weight_examples():
    assert universal_weight("0000") == 0.0
    assert universal_weight("0011") == -4.0


@pytest.mark.parametrize("n", range(1, 9))
def test_universal_weight_is_max_likelihood(n):
    for x in itertools.product("01", repeat=n):
        s = "".join(x)
        counts = (s.count("0"), s.count("1"))
        grid = math.log2(brute_max_product_prob(counts))
        assert universal_weight(s) >= grid - 1e-12
        assert universal_weight(s) - grid <= 0.02 * n


def test_ml_dominance_over_memoryless_grid():
    for n in (4, 7):
        for x in itertools.product("01", repeat=n):
            s = "".join(x)
            for p in np.linspace(0.05, 0.95, 19):
                lp = HiddenMarkovSource.memoryless([1 - p, p]).exact_log_prob(s)
                assert universal_weight(s) >= lp - 1e-12


def test_universal_table_n2():
    t = universal_dist_exact(Alphabet.binary(), 2)
    assert t.normalizer == pytest.approx(2.5)
    assert t.prob("00") == pytest.approx(0.4)
    assert t.prob("01") == pytest.approx(0.1)
    assert 1 <= t.normalizer <= 3


@pytest.mark.parametrize("alpha", [2, 3])
def test_n1_uniform(alpha):
    t = universal_dist_exact(Alphabet.of("abc"[:alpha]), 1)
    assert np.allclose(t.probabilities, 1 / alpha)


@pytest.mark.parametrize("alpha", [2, 3])
def test_normalizer_sandwich_and_enumeration(alpha):
    for n in range(1, 13):
        z = universal_normalizer(alpha, n)
        assert 1 <= z <= (n + 1) ** (alpha - 1)
        if alpha ** n <= 3 ** 8:
            X = all_sequences(alpha, n)
            assert z == pytest.approx(np.exp2(-batch_n_entropy(X, alpha)).sum(), rel=1e-12)


def test_type_invariance():
    for n in range(1, 9):
        X = all_sequences(2, n)
        h = batch_n_entropy(X, 2)
        by_count = {}
        for row, v in zip(X, h):
            by_count.setdefault(int(row.sum()), set()).add(v)
        assert all(len(vals) == 1 for vals in by_count.values())


def test_all_sequences_lexicographic():
    X = all_sequences(3, 3)
    assert [tuple(r) for r in X] == list(itertools.product(range(3), repeat=3))


def test_guard():
    check_guard(3, 14)
    with pytest.raises(GuardExceeded):
        check_guard(3, 15)
    with pytest.raises(GuardExceeded):
        check_guard(2, 30)


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="01", min_size=1, max_size=40))
def test_permutation_invariance(s):
    assert universal_weight(s) == universal_weight("".join(sorted(s)))
    assert 0 <= empirical_entropy(s) <= 1
