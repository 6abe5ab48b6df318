import numpy as np
import pytest

from uguess.sources import Alphabet, HiddenMarkovSource


@pytest.fixture
def binary():
    return Alphabet.binary()


@pytest.fixture
def bern02():
    return HiddenMarkovSource.memoryless([0.8, 0.2], Alphabet.binary())


@pytest.fixture
def hmm2():
    k = np.zeros((2, 2, 2))
    k[0] = [[0.7 * 0.9, 0.7 * 0.1], [0.3 * 0.9, 0.3 * 0.1]]
    k[1] = [[0.2 * 0.2, 0.2 * 0.8], [0.8 * 0.2, 0.8 * 0.8]]
    return HiddenMarkovSource(Alphabet.binary(), k, 0)
