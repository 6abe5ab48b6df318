import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from oracles import brute_hmm_prob, brute_joint_hmm_prob
from uguess.sources import (Alphabet, HiddenMarkovSource, JointHiddenMarkovSource, SourceError,
                            as_sequence, load_source, source_from_dict, source_to_dict)


def random_kernel(rng, s, a):
    k = rng.dirichlet(np.ones(a * s), size=s)
    return k.reshape(s, a, s)


def test_alphabet_roundtrip():
    ab = Alphabet.of("abc")
    assert ab.decode(ab.encode("cab").symbols) == "cab"
    with pytest.raises(SourceError):
        Alphabet.of("aa")
    with pytest.raises(SourceError):
        ab.encode("abd")


def test_memoryless_pair_probability():
    src = HiddenMarkovSource.memoryless([0.8, 0.2], Alphabet.binary())
    assert src.exact_log_prob("00") == pytest.approx(math.log2(0.64), abs=1e-14)
    assert src.exact_log_prob("") == 0.0


def test_generate_empty_and_deterministic(hmm2):
    assert len(hmm2.generate(0, np.random.default_rng(1))) == 0
    a = hmm2.generate(50, np.random.default_rng(9))
    b = hmm2.generate(50, np.random.default_rng(9))
    assert a == b


@pytest.mark.statistical
def test_single_state_frequency():
    src = HiddenMarkovSource.memoryless([0.7, 0.3], Alphabet.binary())
    rng = np.random.default_rng(2024)
    ones = sum(src.generate(1, rng).symbols[0] for _ in range(100_000))
    assert abs(ones / 100_000 - 0.3) <= 0.01


@pytest.mark.parametrize("seed", range(5))
def test_forward_matches_state_paths(seed):
    rng = np.random.default_rng(seed)
    k = random_kernel(rng, 2, 2)
    src = HiddenMarkovSource(Alphabet.binary(), k, 1)
    for n in range(1, 9):
        for x in itertools.product((0, 1), repeat=n):
            assert 2 ** src.exact_log_prob(list(x)) == pytest.approx(brute_hmm_prob(k, 1, x), abs=1e-10)


def test_batch_matches_scalar(hmm2):
    X = np.array(list(itertools.product((0, 1), repeat=7)))
    batch = hmm2.batch_log_prob(X)
    for row, v in zip(X, batch):
        assert v == pytest.approx(hmm2.exact_log_prob(list(row)), abs=1e-12)


@pytest.mark.parametrize("alpha,n", [(2, 10), (3, 6)])
def test_probabilities_sum_to_one(alpha, n):
    rng = np.random.default_rng(alpha * 100 + n)
    src = HiddenMarkovSource(Alphabet.of("abc"[:alpha]), random_kernel(rng, 3, alpha), 0)
    X = np.array(list(itertools.product(range(alpha), repeat=n)))
    assert np.exp2(src.batch_log_prob(X)).sum() == pytest.approx(1.0, abs=1e-9)


def test_joint_product_and_paths():
    p, q = np.array([0.8, 0.2]), np.array([0.4, 0.6])
    k = (p[:, None] * q[None, :]).reshape(1, 2, 2, 1)
    src = JointHiddenMarkovSource(Alphabet.binary(), Alphabet.binary(), k, 0)
    got = src.exact_joint_log_prob([0, 1, 1], [1, 1, 0])
    assert got == pytest.approx(math.log2(0.8 * 0.2 * 0.2) + math.log2(0.6 * 0.6 * 0.4), abs=1e-12)
    assert src.exact_joint_log_prob([], []) == 0.0
    with pytest.raises(ValueError):
        src.exact_joint_log_prob([0], [0, 1])

    rng = np.random.default_rng(5)
    k2 = rng.dirichlet(np.ones(8), size=2).reshape(2, 2, 2, 2)
    src2 = JointHiddenMarkovSource(Alphabet.binary(), Alphabet.binary(), k2, 0)
    for n in range(1, 7):
        for x in itertools.product((0, 1), repeat=n):
            y = tuple(reversed(x))
            want = brute_joint_hmm_prob(k2, 0, x, y)
            assert 2 ** src2.exact_joint_log_prob(list(x), list(y)) == pytest.approx(want, abs=1e-10)


def test_kernel_validation_names_slice():
    k = np.full((2, 2, 2), 0.25)
    k[1, 0, 0] = 0.3
    with pytest.raises(SourceError, match="state 1"):
        HiddenMarkovSource(Alphabet.binary(), k, 0)
    with pytest.raises(SourceError):
        HiddenMarkovSource(Alphabet.binary(), np.full((1, 3, 1), 1 / 3), 0)


def test_loader_shapes(tmp_path, hmm2):
    path = tmp_path / "src.json"
    path.write_text(json.dumps(source_to_dict(hmm2)))
    again = load_source(path)
    assert np.array_equal(again.kernel, hmm2.kernel)
    mem = source_from_dict({"alphabet": ["a", "b"], "probabilities": [0.5, 0.5]})
    assert mem.exact_log_prob(as_sequence("ab", mem.alphabet)) == pytest.approx(-2.0)
    with pytest.raises(SourceError, match="missing field"):
        source_from_dict({"alphabet": ["a", "b"], "states": 1})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 12))
def test_log_prob_nonpositive_and_consistent(seed, n):
    rng = np.random.default_rng(seed)
    src = HiddenMarkovSource(Alphabet.binary(), random_kernel(rng, 2, 2), 0)
    x = src.generate(n, rng)
    lp = src.exact_log_prob(x)
    assert lp <= 1e-12 and np.isfinite(lp)
