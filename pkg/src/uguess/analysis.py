"""Information measures and guessing exponents, in bits per symbol."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .empirical import all_sequences, check_guard
from .guesswork import list_moment, randomized_strategy_moment
from .lz_parse import lz78_parse
from .sources import HiddenMarkovSource, Sequence


class ExponentMismatch(AssertionError):
    """The two forms of the guessing exponent disagree."""


def _dist(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("expected a probability vector summing to 1")
    return p


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def renyi_entropy(p, order: float) -> float:
    """Renyi entropy of the given order (> 0, != 1) in bits."""
    p = _dist(p)
    if order <= 0 or order == 1:
        raise ValueError(f"Renyi order must be positive and != 1, got {order!r}")
    nz = p[p > 0]
    return float(math.log2(np.sum(nz ** order)) / (1 - order))


def kl_divergence(q, p) -> float:
    q, p = np.asarray(q, dtype=float), np.asarray(p, dtype=float)
    mask = q > 0
    if np.any(p[mask] == 0):
        return math.inf
    return float(np.sum(q[mask] * np.log2(q[mask] / p[mask])))


def exponent_objective(q, p, rho: float) -> float:
    """rho H(Q) - D(Q || P)."""
    return rho * shannon_entropy(q) - kl_divergence(q, p)


def tilted_distribution(p, rho: float) -> np.ndarray:
    """Maximizer of rho H(Q) - D(Q || P): Q(x) proportional to P(x)^(1/(1+rho))."""
    w = np.asarray(p, dtype=float) ** (1 / (1 + rho))
    return w / w.sum()


def simplex_grid(alpha: int, steps: int):
    for point in itertools.product(range(steps + 1), repeat=alpha - 1):
        if sum(point) <= steps:
            yield np.array(point + (steps - sum(point),), dtype=float) / steps


def guessing_exponent(p, rho: float, grid_steps: int = 200, check: bool = True) -> float:
    """Optimal guessing exponent rho * H_{1/(1+rho)}(P) of a memoryless source.

    With ``check`` set, the variational form is evaluated at the tilted
    distribution and must match within 1e-6, and no point of a simplex grid
    (alphabets up to 3) may beat it.
    """
    p = _dist(p)
    if rho <= 0:
        raise ValueError("rho must be positive")
    closed = rho * renyi_entropy(p, 1 / (1 + rho))
    if check:
        at_opt = exponent_objective(tilted_distribution(p, rho), p, rho)
        if abs(at_opt - closed) > 1e-6:
            raise ExponentMismatch(f"closed form {closed} vs variational {at_opt}")
        if len(p) <= 3:
            best = max(exponent_objective(q, p, rho) for q in simplex_grid(len(p), grid_steps))
            if best > closed + 1e-9:
                raise ExponentMismatch(f"grid point beats the tilted optimum: {best} > {closed}")
    return closed


def conditional_guessing_exponent(p_xy, rho: float, starts: int = 8, seed: int = 0) -> float:
    """max over joint Q of rho H_Q(X|Y) - D(Q || P_XY), by numerical optimization."""
    p = np.asarray(p_xy, dtype=float)
    if p.ndim != 2 or abs(p.sum() - 1) > 1e-12:
        raise ValueError("expected a joint probability matrix summing to 1")
    support = p.ravel() > 0
    logp = np.log2(p.ravel()[support])

    def negative(theta):
        q = np.zeros(p.size)
        z = theta - theta.max()
        q[support] = np.exp(z) / np.exp(z).sum()
        qm = q.reshape(p.shape)
        qy = qm.sum(axis=0)
        nz = q > 0
        h_xy = -np.sum(q[nz] * np.log2(q[nz]))
        h_y = -np.sum(qy[qy > 0] * np.log2(qy[qy > 0]))
        div = np.sum(q[support][q[support] > 0] * (np.log2(q[support][q[support] > 0])
                                                  - logp[q[support] > 0]))
        return -(rho * (h_xy - h_y) - div)

    rng = np.random.default_rng(seed)
    best = -math.inf
    for i in range(starts):
        theta0 = np.log(p.ravel()[support]) if i == 0 else rng.normal(size=support.sum())
        res = minimize(negative, theta0, method="BFGS", options={"gtol": 1e-10})
        best = max(best, -res.fun)
    return float(best)


def memoryless_probabilities(source: HiddenMarkovSource) -> np.ndarray | None:
    """Letter probabilities when ``source`` is memoryless, else None."""
    k = source.kernel
    if source.states == 1:
        return k[0, :, 0].copy()
    letter = k.sum(axis=2)
    if np.allclose(letter, letter[0]) and np.allclose(k.sum(axis=1), k.sum(axis=1)[0]):
        return letter[0].copy()
    return None


@dataclass
class ExponentReport:
    rho: float
    theory: float | None
    measured: dict[str, dict[int, float]] = field(default_factory=dict)
    stderr: dict[str, dict[int, float]] = field(default_factory=dict)

    @property
    def gaps(self) -> dict[str, dict[int, float]]:
        if self.theory is None:
            return {}
        return {s: {n: v - self.theory for n, v in per_n.items()} for s, per_n in self.measured.items()}

    def rows(self):
        for s, per_n in self.measured.items():
            for n, v in sorted(per_n.items()):
                gap = None if self.theory is None else v - self.theory
                yield {"strategy": s, "n": n, "rho": self.rho, "measured": v,
                       "theory": self.theory, "gap": gap}


def lz_complexity_moment(source: HiddenMarkovSource, n: int, rho: float,
                         include_tail: bool = False, samples: int | None = None,
                         seed: int = 0) -> tuple[float, float]:
    """log2 E[2^(rho c(X) log2 c(X))] and its standard error (0 when exact).

    Exact enumeration inside the guard; otherwise a plain Monte Carlo average
    over ``samples`` draws, whose standard error is propagated to the log.
    """
    def term(row) -> float:
        parse = lz78_parse(Sequence(source.alphabet, tuple(int(v) for v in row)))
        c = parse.emitted if include_tail else parse.c
        return rho * c * math.log2(c) if c > 0 else 0.0

    if samples is None:
        check_guard(source.alphabet.size, n)
        X = all_sequences(source.alphabet.size, n)
        logp = source.batch_log_prob(X)
        exps = np.array([term(r) for r in X]) + logp
        top = exps.max()
        return float(top + np.log2(np.exp2(exps - top).sum())), 0.0
    rng = np.random.default_rng(seed)
    vals = np.array([term(source.generate(n, rng).symbols) for _ in range(samples)])
    top = vals.max()
    w = np.exp2(vals - top)
    mean = w.mean()
    se = w.std(ddof=1) / math.sqrt(samples)
    return float(top + math.log2(mean)), float(se / (mean * math.log(2)))


def lz_exponent_estimate(source: HiddenMarkovSource, rho: float, n_list, samples: int | None = None,
                         seed: int = 0, lists: bool = True) -> ExponentReport:
    """Per-n (1/n) log2 E[2^(rho c log c)] in both tail conventions, plus the LZ-list exponent."""
    p = memoryless_probabilities(source)
    theory = guessing_exponent(p, rho, check=False) if p is not None else None
    report = ExponentReport(rho, theory)
    for n in n_list:
        exact = samples is None
        if exact:
            check_guard(source.alphabet.size, n)
        for name, tail in (("lz-complexity", False), ("lz-complexity-tail", True)):
            v, se = lz_complexity_moment(source, n, rho, tail, samples, seed)
            report.measured.setdefault(name, {})[n] = v / n
            report.stderr.setdefault(name, {})[n] = se / n
        if lists and exact:
            m = list_moment(source, n, rho, "lz")
            report.measured.setdefault("list-lz", {})[n] = math.log2(m.value) / n
    return report


def sandwich_gaps(report: ExponentReport, variant: str = "lz-complexity") -> dict[int, float]:
    """|LZ-list exponent - complexity exponent| per n."""
    lst, cpx = report.measured["list-lz"], report.measured[variant]
    return {n: abs(lst[n] - cpx[n]) for n in sorted(lst)}


LIST_STRATEGIES = {"list-probability": "probability", "list-entropy": "entropy", "list-lz": "lz"}
RANDOMIZED_STRATEGIES = ("kt", "lz-tree", "lz-bits")


def exponent_sweep(source: HiddenMarkovSource, rhos, n_list, strategies) -> list[dict]:
    """Rows (strategy, n, rho, measured, theory, gap) with measured = (1/n) log2 E{G^rho}."""
    p = memoryless_probabilities(source)
    rows = []
    for rho in rhos:
        theory = guessing_exponent(p, rho, check=False) if p is not None else None
        for s in strategies:
            for n in n_list:
                if s in LIST_STRATEGIES:
                    value = math.log2(list_moment(source, n, rho, LIST_STRATEGIES[s]).value) / n
                elif s in RANDOMIZED_STRATEGIES:
                    value = math.log2(randomized_strategy_moment(source, n, rho, s).value) / n
                elif s in ("lz-complexity", "lz-complexity-tail"):
                    value = lz_complexity_moment(source, n, rho, s.endswith("tail"))[0] / n
                else:
                    raise ValueError(f"unknown strategy {s!r}")
                rows.append({"strategy": s, "n": n, "rho": rho, "measured": value,
                             "theory": theory, "gap": None if theory is None else value - theory})
    return rows
