"""Universal and randomized guessing for memoryless and hidden-Markov sources.

The top-level namespace re-exports the pieces most scripts need; everything
else lives in the submodules.
"""

from .analysis import guessing_exponent, renyi_entropy
from .guesswork import (
    attack_trials,
    geometric_moment,
    list_moment,
    randomized_strategy_moment,
    simulate_attack,
)
from .kt_sampler import kt_sample
from .lz_parse import joint_parse, lz78_parse, lz_code_length
from .lz_sampler import alg1_sample, alg2_sample, cond_sample
from .sources import Alphabet, HiddenMarkovSource, JointHiddenMarkovSource, Sequence, load_source
from .strategies import STRATEGIES, get_strategy

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "HiddenMarkovSource", "JointHiddenMarkovSource", "Sequence", "STRATEGIES",
    "alg1_sample", "alg2_sample", "attack_trials", "cond_sample", "geometric_moment",
    "get_strategy", "guessing_exponent", "joint_parse", "kt_sample", "list_moment",
    "load_source", "lz78_parse", "lz_code_length", "randomized_strategy_moment",
    "renyi_entropy", "simulate_attack",
]
