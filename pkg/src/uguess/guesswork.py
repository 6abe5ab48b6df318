"""Guesswork moments, randomized-guessing series and attack simulation."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import zeta

from .empirical import all_sequences, batch_n_entropy, check_guard
from .lz_parse import lz_code_length
from .lz_sampler import SUCCESS
from .sources import Alphabet, HiddenMarkovSource, Sequence, as_sequence
from .strategies import get_strategy

ORDERINGS = ("probability", "entropy", "lz")
# below this success probability the direct series is replaced by the
# polylogarithm expansion around q = 1
SERIES_SWITCH = 0.05
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MomentResult:
    value: float
    method: str
    error_bound: float
    rho: float

    def __post_init__(self):
        if self.error_bound < 0:
            raise ValueError("error bound must be non-negative")


@dataclass
class AttackTrace:
    total_queries: int
    per_agent: list[int]
    success: bool
    agents: int

    @property
    def rounds(self) -> int:
        return -(-self.total_queries // self.agents)


# ---------------------------------------------------------------------------
# Deterministic guessing lists


def ordering_keys(X: np.ndarray, alphabet: Alphabet, ordering: str, log_probs=None) -> np.ndarray:
    """Sort keys for a guessing list over the rows of ``X`` (smaller is guessed first)."""
    if ordering == "probability":
        return -np.round(log_probs, 9)
    if ordering == "entropy":
        return batch_n_entropy(X, alphabet.size)
    if ordering == "lz":
        return np.array([lz_code_length(Sequence(alphabet, tuple(map(int, row)))) for row in X],
                        dtype=float)
    raise ValueError(f"unknown ordering {ordering!r}; choose from {ORDERINGS}")


def guessing_ranks(keys: np.ndarray) -> np.ndarray:
    """1-based rank of each row; rows arrive in lexicographic order, which breaks ties."""
    order = np.argsort(keys, kind="stable")
    ranks = np.empty(len(keys), dtype=np.int64)
    ranks[order] = np.arange(1, len(keys) + 1)
    return ranks


def list_moment(source: HiddenMarkovSource, n: int, rho: float, ordering: str) -> MomentResult:
    """E{G^rho} for the deterministic list ordered by ``ordering``."""
    alpha = source.alphabet.size
    check_guard(alpha, n)
    X = all_sequences(alpha, n)
    logp = source.batch_log_prob(X)
    ranks = guessing_ranks(ordering_keys(X, source.alphabet, ordering, logp))
    value = math.fsum(np.exp2(logp) * ranks.astype(float) ** rho)
    return MomentResult(value, "exact-enumeration", 0.0, rho)


# ---------------------------------------------------------------------------
# Randomized guessing: sum_k k^rho (1-p)^(k-1) p


def _direct_series(q: float, rho: float, rel_tol: float) -> tuple[float, float]:
    """sum_{k>=1} k^rho q^(k-1) by blocks; returns (partial sum, error bound).

    The bound covers the truncated tail and the floating-point error of each
    term, whose exponent argument is off by a few ulps of its magnitude.
    """
    partial = 0.0
    rounding = 0.0
    start = 1
    block = 256
    log_q = math.log(q) if q > 0 else -math.inf
    while True:
        k = np.arange(start, start + block, dtype=float)
        if q > 0:
            arg = rho * np.log(k) + (k - 1) * log_q
            terms = np.exp(arg)
            rounding += math.fsum(terms * (np.abs(arg) + (k - 1) / q + 4)) * _EPS
        else:
            terms = np.where(k == 1, 1.0, 0.0)
        partial += math.fsum(terms)
        last = start + block - 1
        ratio = (1 + 1 / last) ** rho * q
        if ratio < 1:
            tail = float(terms[-1]) * ratio / (1 - ratio)
            if tail <= rel_tol * partial:
                return partial, tail + rounding
        start += block
        block = min(block * 2, 1 << 16)


def _polylog_series(mu: float, rho: float, rel_tol: float) -> tuple[float, float]:
    """Li_{-rho}(q) / q for q = e^mu, expanded in mu; returns (value, error bound)."""
    q = math.exp(mu)
    lead = float(gamma_fn(1 + rho)) * (-mu) ** (-rho - 1)
    total = lead
    # mu carries one rounding, amplified by the power in the leading term
    rounding = (rho + 4) * abs(lead) * _EPS
    term_fact = 1.0  # mu^j / j!
    j = 0
    while True:
        term = float(zeta(-rho - j)) * term_fact
        total += term
        rounding += 8 * abs(term) * _EPS
        j += 1
        term_fact *= mu / j
        # |zeta(-s)| <= 2 Gamma(s+1) zeta(s+1) / (2 pi)^(s+1) for s > 0
        s = rho + j
        bound = 2 * math.exp(math.lgamma(s + 1) - (s + 1) * math.log(2 * math.pi)) * float(
            zeta(s + 1)) * abs(term_fact)
        ratio = (s + 1) * abs(mu) / ((j + 1) * 2 * math.pi)
        if ratio < 1:
            tail = bound / (1 - ratio)
            if tail <= rel_tol * abs(total):
                return total / q, (2 * tail + rounding) / q


def geometric_moment(p: float, rho: float, rel_tol: float = 1e-10) -> MomentResult:
    """E{G^rho} when each guess independently succeeds with probability ``p``."""
    if not 0 < p <= 1:
        raise ValueError(f"success probability must be in (0, 1], got {p!r}")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if p == 1:
        return MomentResult(1.0, "truncated-series", 0.0, rho)
    q = 1.0 - p
    if p >= SERIES_SWITCH:
        s, err = _direct_series(q, rho, rel_tol)
    else:
        s, err = _polylog_series(math.log1p(-p), rho, rel_tol)
    return MomentResult(p * s, "truncated-series", p * err, rho)


@lru_cache(maxsize=32)
def strategy_log_probs(strategy: str, alphabet: Alphabet, n: int) -> np.ndarray:
    """log2 of the strategy's guess probability for every sequence of length n, in lexicographic order."""
    strat = get_strategy(strategy)
    X = all_sequences(alphabet.size, n)
    out = np.array([strat.log_prob(Sequence(alphabet, tuple(int(v) for v in row))) for row in X])
    out.setflags(write=False)
    return out


def randomized_strategy_moment(source: HiddenMarkovSource, n: int, rho: float, strategy: str,
                               rel_tol: float = 1e-10, monte_carlo: bool = False,
                               trials: int = 10_000, seed: int = 0,
                               max_queries: int | None = None) -> MomentResult:
    """E{G^rho} for i.i.d. guesses drawn from ``strategy``'s distribution."""
    strat = get_strategy(strategy)
    if strat.needs_si:
        raise ValueError("use a joint source for side-information strategies")
    alpha = source.alphabet.size
    if monte_carlo:
        rng = np.random.default_rng(seed)
        vals = []
        for t in range(trials):
            secret = source.generate(n, rng)
            trace = simulate_attack(secret, strategy, 1, np.random.SeedSequence(seed, spawn_key=(t,)),
                                    max_queries=max_queries)
            vals.append(float(trace.total_queries) ** rho)
        vals = np.asarray(vals)
        return MomentResult(float(vals.mean()), "monte-carlo",
                            float(vals.std(ddof=1) / math.sqrt(len(vals))), rho)
    check_guard(alpha, n)
    X = all_sequences(alpha, n)
    probs = np.exp2(source.batch_log_prob(X))
    guess_probs = np.exp2(strategy_log_probs(strategy, source.alphabet, n))
    cache: dict[float, MomentResult] = {}
    total, err = [], []
    for pt, px in zip(guess_probs.tolist(), probs):
        if px == 0:
            continue
        m = cache.get(pt)
        if m is None:
            m = cache[pt] = geometric_moment(pt, rho, rel_tol)
        total.append(px * m.value)
        err.append(px * m.error_bound)
    return MomentResult(math.fsum(total), "exact-enumeration", math.fsum(err), rho)


def concentration_tail(p: float, k: int) -> float:
    """log of Pr{G >= k} = (1-p)^(k-1) for i.i.d. guessing with success probability p."""
    if not 0 < p <= 1:
        raise ValueError(f"success probability must be in (0, 1], got {p!r}")
    if k < 1:
        raise ValueError("threshold must be >= 1")
    if k == 1:
        return 0.0
    if p == 1:
        return float("-inf")
    return (k - 1) * math.log1p(-p)


def double_exponential_bound(n: int, entropy: float, eps: float) -> tuple[int, float, float]:
    """(threshold k, log tail at k, log of exp(-2^(n eps))) for p = 2^(-n H)."""
    p = 2.0 ** (-n * entropy)
    k = math.ceil(2.0 ** (n * (entropy + eps)))
    return k, concentration_tail(p, k), -(2.0 ** (n * eps))


def lemma1_check(a: float, rho: float, n: int, rel_tol: float = 1e-12) -> tuple[float, float]:
    """S = sum_k k^rho (1 - e^{-na})^(k-1) and the gap (1/n) ln S - (1 + rho) a."""
    if a < 0 or rho <= 0 or n < 1:
        raise ValueError("need a >= 0, rho > 0, n >= 1")
    if n * a > 40:
        raise ValueError("n * a must be <= 40")
    p = math.exp(-n * a)
    if p == 1.0:
        return 1.0, 0.0
    if rho == 1:
        # sum_k k q^(k-1) = 1/p^2 = e^(2na), so the gap vanishes identically
        return math.exp(2 * n * a), 0.0
    if p >= SERIES_SWITCH:
        s, _ = _direct_series(-math.expm1(-n * a), rho, rel_tol)
    else:
        s, _ = _polylog_series(math.log1p(-p), rho, rel_tol)
    return s, math.log(s) / n - (1 + rho) * a


# ---------------------------------------------------------------------------
# Attack simulation


def _agent_generators(seed, agents: int) -> list[np.random.Generator]:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(agents)]


def _round_robin_total(agent: int, index: int, agents: int) -> int:
    """Global query number of agent ``agent``'s ``index``-th query (both 0-based)."""
    return index * agents + agent + 1


def _trace(total: int, agents: int, success: bool) -> AttackTrace:
    per_agent = [max(0, (total - a - 1) // agents + 1) for a in range(agents)]
    return AttackTrace(total, per_agent, success, agents)


class MatchAutomaton:
    """Sampler states consistent with a fixed secret, compiled lazily to arrays.

    State 0 is the start. Each expanded state has cumulative branch
    probabilities; drawing a uniform past the last one means the guess has
    already diverged from the secret.
    """

    FAIL, HIT = -1, -2

    def __init__(self, start, branches):
        self._branches = branches
        self._ids = {start: 0}
        self._keys = [start]
        self.expanded = 0
        self.width = 1
        self.cum = np.full((64, 1), np.inf)
        self.nxt = np.full((64, 1), self.FAIL, dtype=np.int64)
        self.ensure(0)

    def _id(self, state) -> int:
        if state is SUCCESS:
            return self.HIT
        i = self._ids.get(state)
        if i is None:
            i = self._ids[state] = len(self._keys)
            self._keys.append(state)
        return i

    def _reserve(self, rows: int, width: int) -> None:
        r, w = self.cum.shape
        if rows <= r and width <= w:
            return
        r2, w2 = max(r, rows) if rows <= r else max(rows, 2 * r), max(w, width)
        cum = np.full((r2, w2), np.inf)
        nxt = np.full((r2, w2), self.FAIL, dtype=np.int64)
        cum[:r, :w] = self.cum
        nxt[:r, :w] = self.nxt
        self.cum, self.nxt = cum, nxt

    def ensure(self, upto: int) -> None:
        """Expand every discovered state with id <= ``upto``."""
        while self.expanded <= upto:
            j = self.expanded
            out = self._branches(self._keys[j])
            self._reserve(j + 1, len(out))
            self.cum[j, :len(out)] = np.cumsum([float(p) for p, _ in out])
            self.nxt[j, :len(out)] = [self._id(st) for _, st in out]
            self.width = max(self.width, len(out))
            self.expanded += 1

    def walk(self, u: np.ndarray) -> np.ndarray:
        """Outcome for each row of uniforms: True when the guess equals the secret."""
        rows = u.shape[0]
        state = np.zeros(rows, dtype=np.int64)
        alive = np.arange(rows)
        hit = np.zeros(rows, dtype=bool)
        for t in range(u.shape[1]):
            if alive.size == 0:
                break
            s = state[alive]
            self.ensure(int(s.max()))
            cum = self.cum[s, :self.width]
            branch = (cum <= u[alive, t][:, None]).sum(axis=1)
            nxt = self.nxt[s, np.minimum(branch, self.width - 1)]
            nxt[branch >= self.width] = self.FAIL
            hit[alive[nxt == self.HIT]] = True
            keep = nxt >= 0
            state[alive[keep]] = nxt[keep]
            alive = alive[keep]
        if alive.size:
            raise RuntimeError("match automaton deeper than the supplied uniforms")
        return hit


def _automaton_for(secret: Sequence, strategy: str, y=None) -> MatchAutomaton:
    strat = get_strategy(strategy)
    model = strat.match_model(secret, y) if strat.needs_si else strat.match_model(secret)
    return MatchAutomaton(*model)


def simulate_attack(secret, strategy: str, agents: int, rng, max_queries: int | None = None,
                    y=None, engine: str = "automaton", block: int | None = None,
                    automaton: MatchAutomaton | None = None) -> AttackTrace:
    """K uncoordinated agents guess i.i.d. in round-robin order until one hits ``secret``.

    ``rng`` is a seed or SeedSequence; each agent gets its own spawned stream.
    The "direct" engine builds full guesses with the strategy's sampler. The
    "automaton" engine draws the same random choices but stops reading a guess
    as soon as it departs from the secret, vectorized over blocks of queries.
    """
    if agents < 1:
        raise ValueError("need at least one agent")
    secret = as_sequence(secret)
    gens = _agent_generators(rng, agents)
    strat = get_strategy(strategy)
    limit = max_queries if max_queries is not None else 1 << 62

    if engine == "direct":
        guessers = [strat.guesser(secret.alphabet, g, n=len(secret), y=y) for g in gens]
        total = 0
        while total < limit:
            guess = guessers[total % agents]()
            total += 1
            if guess.symbols == secret.symbols:
                return _trace(total, agents, True)
        return _trace(limit, agents, False)

    if engine != "automaton":
        raise ValueError(f"unknown engine {engine!r}")
    if automaton is None:
        automaton = _automaton_for(secret, strategy, y)
    depth = len(secret)
    # blocks start small and double, so easy secrets do not pay for long walks
    cap = block or max(64, 8192 // agents)
    size = min(16, cap)
    done = 0  # queries issued per agent so far
    while done * agents < limit:
        u = np.concatenate([g.random((size, depth)) for g in gens])
        hits = automaton.walk(u).reshape(agents, size)
        if hits.any():
            first = np.where(hits.any(axis=1), hits.argmax(axis=1), size)
            best = min(_round_robin_total(a, done + int(i), agents)
                       for a, i in enumerate(first) if i < size)
            if best <= limit:
                return _trace(best, agents, True)
            break
        done += size
        size = min(2 * size, cap)
    return _trace(limit, agents, False)


@dataclass
class AttackSummary:
    traces: list[AttackTrace] = field(default_factory=list)

    @property
    def totals(self) -> np.ndarray:
        return np.array([t.total_queries for t in self.traces])


def _run_chunk(args):
    secret, strategy, agents, seed, trial_ids, max_queries, y, engine = args
    auto = _automaton_for(secret, strategy, y) if engine == "automaton" else None
    return [simulate_attack(secret, strategy, agents, np.random.SeedSequence(seed, spawn_key=(t,)),
                            max_queries=max_queries, y=y, engine=engine, automaton=auto)
            for t in trial_ids]


def attack_trials(secret, strategy: str, agents: int, trials: int, seed: int,
                  max_queries: int | None = None, y=None, engine: str = "automaton",
                  workers: int = 1) -> AttackSummary:
    """Independent attack trials; trial t uses the stream spawned from (seed, t)."""
    secret = as_sequence(secret)
    ids = list(range(trials))
    if workers <= 1:
        return AttackSummary(_run_chunk((secret, strategy, agents, seed, ids, max_queries, y, engine)))
    chunks = [ids[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_run_chunk, [(secret, strategy, agents, seed, c, max_queries, y, engine)
                                           for c in chunks]))
    by_trial = {}
    for chunk, part in zip(chunks, parts):
        by_trial.update(zip(chunk, part))
    return AttackSummary([by_trial[t] for t in ids])
