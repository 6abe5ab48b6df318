import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from oracles import enumerate_law
from uguess.empirical import empirical_entropy
from uguess.kt_sampler import (KTSampler, KTSISampler, MixtureState, kt_closed_form_log_prob,
                               kt_conditional, kt_conditional_si, kt_sample, kt_sequence_log_prob,
                               kt_si_log_prob)
from uguess.sources import Alphabet, Sequence


def test_conditionals():
    s = MixtureState(2)
    assert kt_conditional(s, 0) == 0.5
    s.update(1)
    assert kt_conditional(s, 1) == 0.75
    assert kt_conditional(s, 0) + kt_conditional(s, 1) == 1.0
    s3 = MixtureState(3)
    for sym in (0, 2, 2, 1):
        s3.update(sym)
    assert sum(kt_conditional(s3, a) for a in range(3)) == pytest.approx(1.0)


def test_si_conditionals():
    s = MixtureState(2)
    assert kt_conditional_si(s, 0, 1) == 0.5
    s.update(0, 1)
    s.update(1, 1)
    # bucket y=1 has counts (1, 1): joint count 1, marginal 2
    assert kt_conditional_si(s, 0, 1) == pytest.approx(1.5 / 3)


def test_sequence_examples():
    assert kt_sequence_log_prob("01") == pytest.approx(math.log2(1 / 8), abs=1e-15)
    closed = (math.lgamma(1) + 2 * math.lgamma(1.5) - math.log(math.pi) - math.lgamma(3)) / math.log(2)
    assert closed == pytest.approx(math.log2(0.125), abs=1e-14)
    assert kt_closed_form_log_prob([1, 1]) == pytest.approx(math.log2(0.125), abs=1e-14)
    assert kt_sequence_log_prob("0") == pytest.approx(-1.0)
    assert kt_sequence_log_prob(Alphabet.of("abc").encode("a")) == pytest.approx(-math.log2(3))


@pytest.mark.slow
def test_closed_form_exhaustive_16():
    worst = 0.0
    for n in range(1, 17):
        for x in itertools.product((0, 1), repeat=n):
            c = [n - sum(x), sum(x)]
            worst = max(worst, abs(kt_sequence_log_prob(list(x)) - kt_closed_form_log_prob(c)))
    assert worst <= 1e-10


def test_exponential_equivalence_constant():
    for n in range(1, 15):
        for x in itertools.product((0, 1), repeat=n):
            dev = abs(-kt_sequence_log_prob(list(x)) / n - empirical_entropy(list(x)))
            assert dev <= (2 * math.log2(n + 1) + 4) / n


def test_induced_law_n2():
    law = enumerate_law(lambda s: KTSampler(Alphabet.binary(), s).sample(2).symbols)
    assert law == {(0, 0): Fraction(3, 8), (0, 1): Fraction(1, 8),
                   (1, 0): Fraction(1, 8), (1, 1): Fraction(3, 8)}


@pytest.mark.parametrize("alpha,n", [(2, 6), (3, 4)])
def test_induced_law_matches_log_prob(alpha, n):
    ab = Alphabet.of("abc"[:alpha])
    law = enumerate_law(lambda s: KTSampler(ab, s).sample(n).symbols)
    assert sum(law.values()) == 1 and len(law) == alpha ** n
    for x, p in law.items():
        assert float(p) == pytest.approx(2 ** kt_sequence_log_prob(Sequence(ab, x)), rel=1e-12)


def test_si_constant_y_equals_plain():
    for n in range(1, 9):
        for x in itertools.product((0, 1), repeat=n):
            assert kt_si_log_prob(list(x), [1] * n) == pytest.approx(kt_sequence_log_prob(list(x)), abs=1e-12)
    plain = KTSampler(Alphabet.binary(), np.random.default_rng(3)).sample(12)
    si = KTSISampler(Alphabet.binary(), np.random.default_rng(3)).sample([0] * 12)
    assert plain == si


def test_si_law_sums_to_one():
    y = Alphabet.binary().encode("011010")
    law = enumerate_law(lambda s: KTSISampler(Alphabet.binary(), s).sample(y).symbols)
    assert sum(law.values()) == 1
    for x, p in law.items():
        assert float(p) == pytest.approx(2 ** kt_si_log_prob(list(x), y), rel=1e-12)


@pytest.mark.statistical
def test_sampler_frequencies_n2():
    rng = np.random.default_rng(11)
    sampler = KTSampler(Alphabet.binary(), rng)
    counts = np.zeros(4)
    for _ in range(200_000):
        a, b = sampler.sample(2).symbols
        counts[2 * a + b] += 1
    expected = np.array([3, 1, 1, 3]) / 8 * counts.sum()
    assert chisquare(counts, expected).pvalue > 0.001


def test_determinism_and_n1():
    assert kt_sample(20, 5) == kt_sample(20, 5)
    with pytest.raises(ValueError):
        kt_sample(0, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=30), st.randoms(use_true_random=False))
def test_exchangeable(x, rnd):
    ab = Alphabet.of("abc")
    y = list(x)
    rnd.shuffle(y)
    assert kt_sequence_log_prob(Sequence(ab, tuple(x))) == pytest.approx(
        kt_sequence_log_prob(Sequence(ab, tuple(y))), abs=1e-9)
