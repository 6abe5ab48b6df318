"""Built-in invariant suites run by ``uguess verify``.

Each suite returns a SuiteResult; exact checks use rational arithmetic where
the quantity is rational, and the float tolerances are the ones the library
promises elsewhere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analysis import guessing_exponent, lz_exponent_estimate, sandwich_gaps
from .empirical import all_sequences, batch_counts, universal_normalizer
from .guesswork import guessing_ranks, lemma1_check, list_moment, ordering_keys, randomized_strategy_moment
from .kt_sampler import kt_closed_form_log_prob, kt_sequence_log_prob
from .lz_parse import lz_code_length
from .lz_sampler import PhraseTree, alg1_prob, alg2_prob, code_tree, cond_prob, integer_tree
from .sources import Alphabet, HiddenMarkovSource, Sequence


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": self.checks,
                "seconds": round(self.seconds, 3), "details": self.details}


def reference_hmm() -> HiddenMarkovSource:
    """Two hidden states, one favouring 0 and one favouring 1, with sticky transitions."""
    k = np.zeros((2, 2, 2))
    k[0] = [[0.7 * 0.9, 0.7 * 0.1], [0.3 * 0.9, 0.3 * 0.1]]
    k[1] = [[0.2 * 0.2, 0.2 * 0.8], [0.8 * 0.2, 0.8 * 0.8]]
    return HiddenMarkovSource(Alphabet.binary(), k, 0)


def _rows(alpha: int, n: int):
    alphabet = Alphabet.of([str(i) for i in range(alpha)]) if alpha > 2 else Alphabet.binary()
    for row in all_sequences(alpha, n):
        yield Sequence(alphabet, tuple(int(v) for v in row))


def leaf_law(max_births: int = 20, seed: int = 0) -> SuiteResult:
    """Every leaf of the phrase tree after i births has probability 1/(alpha + i(alpha-1))."""
    rng = np.random.default_rng(seed)
    checks, ok = 0, True
    for alpha in (2, 3):
        tree = PhraseTree(alpha)
        for i in range(max_births + 1):
            want = Fraction(1, alpha + i * (alpha - 1))
            probs = tree.leaf_probabilities()
            ok &= all(p == want for p in probs.values()) and sum(probs.values()) == 1
            checks += len(probs)
            leaves = tree.leaves()
            tree.birth(leaves[int(rng.integers(len(leaves)))])
    return SuiteResult("leaf-law", ok, checks)


def kraft(max_leaves: int = 256) -> SuiteResult:
    """Complete code trees satisfy Kraft with equality."""
    checks, ok = 0, True
    for m in range(1, max_leaves + 1):
        ok &= code_tree(m).kraft_sum() == 1
        checks += 1
    for top in range(1, 40):
        for valid in ((1,), tuple(range(1, top + 1)), tuple(range(1, top + 1, 2)), (1, top)):
            tree = integer_tree(tuple(sorted(set(valid))))
            ok &= tree.is_complete() and tree.kraft_sum() == 1
            checks += 1
    return SuiteResult("kraft", ok, checks)


def normalization(n: int = 6) -> SuiteResult:
    """Induced laws sum to one, and the universal weights obey the type-class sandwich."""
    details = {}
    seqs = list(_rows(2, n))
    kt_total = math.fsum(2.0 ** kt_sequence_log_prob(x) for x in seqs)
    details["kt"] = kt_total
    details["lz-tree"] = float(sum((alg1_prob(x) for x in seqs), Fraction(0)))
    details["lz-bits"] = float(sum((alg2_prob(x) for x in seqs), Fraction(0)))
    ok = all(abs(v - 1) <= 1e-9 for v in details.values())
    for y in ("0" * n, "011010"[:n].ljust(n, "0"), "1" * (n // 2) + "0" * (n - n // 2)):
        ys = Alphabet.binary().encode(y)
        total = float(sum((cond_prob(x, ys) for x in seqs), Fraction(0)))
        details[f"lz-cond|{y}"] = total
        ok &= abs(total - 1) <= 1e-9
    checks = len(details)
    for alpha in (2, 3):
        for m in range(1, 13):
            z = universal_normalizer(alpha, m)
            ok &= 1 - 1e-12 <= z <= (m + 1) ** (alpha - 1) * (1 + 1e-12)
            checks += 1
    return SuiteResult("normalization", ok, checks, details=details)


def kt_closed_form(max_n: int = 12) -> SuiteResult:
    worst, checks = 0.0, 0
    for n in range(1, max_n + 1):
        X = all_sequences(2, n)
        counts = batch_counts(X, 2)
        for row, c in zip(X, counts):
            seq = kt_sequence_log_prob(Sequence(Alphabet.binary(), tuple(int(v) for v in row)))
            worst = max(worst, abs(seq - kt_closed_form_log_prob([int(v) for v in c])))
            checks += 1
    return SuiteResult("kt-closed-form", worst <= 1e-10, checks, details={"max_abs_diff": worst})


def lemma1_grid(ns=(5, 10, 20), rhos=(0.5, 2.0), grid=(0.05, 0.1, 0.2, 0.5, 1.0)) -> SuiteResult:
    """rho = 1 is exact; elsewhere |gap| shrinks with n and is at most 0.5 at the largest n."""
    ok, checks = True, 0
    for a in grid:
        _, g = lemma1_check(a, 1.0, ns[-1])
        ok &= g == 0.0
        checks += 1
    worst = 0.0
    for rho in rhos:
        for a in grid:
            gaps = [abs(lemma1_check(a, rho, n)[1]) for n in ns]
            ok &= all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:])) and gaps[-1] <= 0.5
            worst = max(worst, gaps[-1])
            checks += 1
    return SuiteResult("lemma1-grid", ok, checks, details={"max_abs_gap_at_largest_n": worst})


def sandwich(n_list=(8, 12, 14), rank_n: int = 12) -> SuiteResult:
    """Rank bound G(x) < 2^(LZ(x)+1) for every x, plus the complexity/list gap per n.

    The rank bound is the finite-n half of the sandwich and is checked. The gap
    trend is reported but not enforced: at these lengths it follows the
    phrase-count staircase rather than shrinking monotonically.
    """
    ok, checks = True, 0
    for n in range(1, rank_n + 1):
        X = all_sequences(2, n)
        ranks = guessing_ranks(ordering_keys(X, Alphabet.binary(), "lz"))
        lz = np.array([lz_code_length(Sequence(Alphabet.binary(), tuple(int(v) for v in r))) for r in X])
        ok &= bool(np.all(ranks < 2.0 ** (lz + 1)))
        checks += len(X)
    report = lz_exponent_estimate(reference_hmm(), 1.0, n_list)
    gaps = sandwich_gaps(report)
    values = [gaps[n] for n in n_list]
    trend = all(a >= b for a, b in zip(values, values[1:]))
    return SuiteResult("sandwich", ok, checks,
                       details={"gaps": {str(n): gaps[n] for n in n_list}, "gap_non_increasing": trend})


def oracle_optimality(ns=(4, 6, 8, 10), rhos=(0.5, 1.0, 2.0)) -> SuiteResult:
    """The probability-ordered list is never beaten by the other orderings or by KT guessing."""
    sources = {"bernoulli-0.2": HiddenMarkovSource.memoryless([0.8, 0.2]), "hmm": reference_hmm()}
    ok, checks = True, 0
    for src in sources.values():
        for n in ns:
            for rho in rhos:
                best = list_moment(src, n, rho, "probability").value
                others = [list_moment(src, n, rho, o).value for o in ("entropy", "lz")]
                others.append(randomized_strategy_moment(src, n, rho, "kt").value)
                ok &= all(best <= v * (1 + 1e-12) for v in others)
                checks += len(others)
    exponent = guessing_exponent([0.8, 0.2], 1.0)
    ok &= abs(exponent - 2 * math.log2(math.sqrt(0.2) + math.sqrt(0.8))) < 1e-12
    return SuiteResult("oracle-optimality", ok, checks + 1, details={"bernoulli-0.2-exponent": exponent})


SUITES = {
    "leaf-law": leaf_law,
    "kraft": kraft,
    "normalization": normalization,
    "kt-closed-form": kt_closed_form,
    "lemma1-grid": lemma1_grid,
    "sandwich": sandwich,
    "oracle-optimality": oracle_optimality,
}


def run_suites(names=None) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        t0 = time.perf_counter()
        res = SUITES[name]()
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
