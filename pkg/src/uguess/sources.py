"""Source models whose realizations are guessed.

All sources are immutable once built. Sequences are stored as tuples of
symbol indices; the alphabet maps indices back to printable characters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence as Seq

import numpy as np

MAX_STATES = 16
MAX_ALPHABET = 16
SUM_TOL = 1e-12


class SourceError(ValueError):
    """Raised when a source definition violates its invariants."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise SourceError("alphabet needs at least 2 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise SourceError(f"duplicate symbols in alphabet {self.symbols!r}")
        if len(self.symbols) > MAX_ALPHABET:
            raise SourceError(f"alphabet size {len(self.symbols)} exceeds {MAX_ALPHABET}")

    @classmethod
    def of(cls, symbols) -> "Alphabet":
        return cls(tuple(str(s) for s in symbols))

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(("0", "1"))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise SourceError(f"symbol {symbol!r} not in alphabet") from None

    def encode(self, text: str) -> "Sequence":
        return Sequence(self, tuple(self.index(ch) for ch in text))

    def decode(self, indices) -> str:
        return "".join(self.symbols[i] for i in indices)


@dataclass(frozen=True)
class Sequence:
    """A finite string over an alphabet, held as symbol indices."""

    alphabet: Alphabet
    symbols: tuple[int, ...]

    def __post_init__(self):
        a = self.alphabet.size
        for s in self.symbols:
            if not 0 <= s < a:
                raise SourceError(f"symbol index {s} out of range for alphabet size {a}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        return self.symbols[item]

    def __str__(self) -> str:
        return self.alphabet.decode(self.symbols)

    @property
    def n(self) -> int:
        return len(self.symbols)


def as_sequence(x, alphabet: Alphabet | None = None) -> Sequence:
    """Coerce a Sequence, a string, or an index list to a Sequence."""
    if isinstance(x, Sequence):
        if alphabet is not None and x.alphabet != alphabet:
            raise SourceError("sequence alphabet does not match")
        return x
    alphabet = alphabet or Alphabet.binary()
    if isinstance(x, str):
        return alphabet.encode(x)
    return Sequence(alphabet, tuple(int(s) for s in x))


def _check_kernel(kernel: np.ndarray, label: str) -> None:
    if np.any(kernel < 0) or not np.all(np.isfinite(kernel)):
        raise SourceError(f"{label}: kernel has negative or non-finite entries")
    for z in range(kernel.shape[0]):
        total = float(kernel[z].sum())
        if abs(total - 1.0) > SUM_TOL:
            raise SourceError(f"{label}: kernel slice for state {z} sums to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class HiddenMarkovSource:
    """Finite-state source with kernel ``K[z, x, z'] = P(x, z' | z)``."""

    alphabet: Alphabet
    kernel: np.ndarray
    initial: int = 0

    def __post_init__(self):
        k = np.array(self.kernel, dtype=float)
        if k.ndim != 3 or k.shape[0] != k.shape[2] or k.shape[1] != self.alphabet.size:
            raise SourceError(f"kernel shape {k.shape} incompatible with alphabet size "
                              f"{self.alphabet.size}; expected (s, alpha, s)")
        if k.shape[0] > MAX_STATES:
            raise SourceError(f"state count {k.shape[0]} exceeds {MAX_STATES}")
        if not 0 <= self.initial < k.shape[0]:
            raise SourceError(f"initial state {self.initial} out of range")
        _check_kernel(k, "HiddenMarkovSource")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    @property
    def states(self) -> int:
        return self.kernel.shape[0]

    @classmethod
    def memoryless(cls, probabilities: Seq[float], alphabet: Alphabet | None = None):
        p = np.asarray(probabilities, dtype=float)
        alphabet = alphabet or Alphabet.of(str(i) for i in range(len(p)))
        return cls(alphabet, p.reshape(1, -1, 1), 0)

    def generate(self, n: int, rng: np.random.Generator) -> Sequence:
        if n < 0:
            raise ValueError("n must be non-negative")
        s, a = self.states, self.alphabet.size
        cdf = np.cumsum(self.kernel.reshape(s, a * s), axis=1)
        z = self.initial
        out = []
        for u in rng.random(n):
            k = min(int(np.searchsorted(cdf[z], u, side="right")), a * s - 1)
            x, z = divmod(k, s)
            out.append(x)
        return Sequence(self.alphabet, tuple(out))

    def exact_log_prob(self, x) -> float:
        """log2 P(x), marginalizing the state path by a scaled forward pass."""
        x = as_sequence(x, self.alphabet)
        v = np.zeros(self.states)
        v[self.initial] = 1.0
        logp = 0.0
        for sym in x.symbols:
            v = v @ self.kernel[:, sym, :]
            total = v.sum()
            if total == 0.0:
                return float("-inf")
            logp += np.log2(total)
            v /= total
        return float(logp)

    def batch_log_prob(self, X: np.ndarray) -> np.ndarray:
        """log2 P(x) for every row of an integer matrix ``X``."""
        X = np.asarray(X, dtype=np.intp)
        N = X.shape[0]
        v = np.zeros((N, self.states))
        v[:, self.initial] = 1.0
        logp = np.zeros(N)
        kx = self.kernel.transpose(1, 0, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            for t in range(X.shape[1] if X.ndim == 2 else 0):
                v = np.einsum("nz,nzw->nw", v, kx[X[:, t]])
                total = v.sum(axis=1)
                logp += np.log2(total)
                v = np.where(total[:, None] > 0, v / total[:, None], 0.0)
        return logp


@dataclass(frozen=True, eq=False)
class JointHiddenMarkovSource:
    """Pair source with kernel ``K[z, x, y, z'] = P(x, y, z' | z)``."""

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    kernel: np.ndarray
    initial: int = 0

    def __post_init__(self):
        k = np.array(self.kernel, dtype=float)
        if (k.ndim != 4 or k.shape[0] != k.shape[3] or k.shape[1] != self.x_alphabet.size
                or k.shape[2] != self.y_alphabet.size):
            raise SourceError(f"joint kernel shape {k.shape} incompatible with alphabets")
        if k.shape[0] > MAX_STATES:
            raise SourceError(f"state count {k.shape[0]} exceeds {MAX_STATES}")
        if not 0 <= self.initial < k.shape[0]:
            raise SourceError(f"initial state {self.initial} out of range")
        _check_kernel(k, "JointHiddenMarkovSource")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    @property
    def states(self) -> int:
        return self.kernel.shape[0]

    def generate(self, n: int, rng: np.random.Generator) -> tuple[Sequence, Sequence]:
        if n < 0:
            raise ValueError("n must be non-negative")
        s, ax, ay = self.states, self.x_alphabet.size, self.y_alphabet.size
        cdf = np.cumsum(self.kernel.reshape(s, -1), axis=1)
        z = self.initial
        xs, ys = [], []
        for u in rng.random(n):
            k = min(int(np.searchsorted(cdf[z], u, side="right")), ax * ay * s - 1)
            k, z = divmod(k, s)
            x, y = divmod(k, ay)
            xs.append(x)
            ys.append(y)
        return Sequence(self.x_alphabet, tuple(xs)), Sequence(self.y_alphabet, tuple(ys))

    def exact_joint_log_prob(self, x, y) -> float:
        x = as_sequence(x, self.x_alphabet)
        y = as_sequence(y, self.y_alphabet)
        if len(x) != len(y):
            raise ValueError(f"length mismatch: |x|={len(x)}, |y|={len(y)}")
        v = np.zeros(self.states)
        v[self.initial] = 1.0
        logp = 0.0
        for a, b in zip(x.symbols, y.symbols):
            v = v @ self.kernel[:, a, b, :]
            total = v.sum()
            if total == 0.0:
                return float("-inf")
            logp += np.log2(total)
            v /= total
        return float(logp)

    def y_marginal(self) -> HiddenMarkovSource:
        return HiddenMarkovSource(self.y_alphabet, self.kernel.sum(axis=1), self.initial)


def load_source(path) -> HiddenMarkovSource | JointHiddenMarkovSource:
    """Load a source from a JSON file.

    Accepted shapes::

        {"alphabet": [...], "probabilities": [...]}                      memoryless
        {"alphabet": [...], "states": s, "initial": z1, "kernel": K}     K[z][x][z']
        {"x_alphabet": [...], "y_alphabet": [...], "states": s,
         "initial": z1, "kernel": K}                                     K[z][x][y][z']
    """
    return source_from_dict(json.loads(Path(path).read_text()))


def source_from_dict(spec: dict) -> HiddenMarkovSource | JointHiddenMarkovSource:
    try:
        if "probabilities" in spec:
            alphabet = Alphabet.of(spec["alphabet"])
            return HiddenMarkovSource.memoryless(spec["probabilities"], alphabet)
        states = int(spec["states"])
        initial = int(spec.get("initial", 0))
        kernel = np.asarray(spec["kernel"], dtype=float)
        if kernel.shape[:1] != (states,):
            raise SourceError(f"kernel has {kernel.shape[0]} state slices, expected {states}")
        if "x_alphabet" in spec:
            return JointHiddenMarkovSource(Alphabet.of(spec["x_alphabet"]),
                                           Alphabet.of(spec["y_alphabet"]), kernel, initial)
        return HiddenMarkovSource(Alphabet.of(spec["alphabet"]), kernel, initial)
    except KeyError as e:
        raise SourceError(f"source definition is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, SourceError):
            raise
        raise SourceError(f"malformed source definition: {e}") from None


def source_to_dict(source) -> dict:
    if isinstance(source, JointHiddenMarkovSource):
        return {"x_alphabet": list(source.x_alphabet.symbols),
                "y_alphabet": list(source.y_alphabet.symbols),
                "states": source.states, "initial": source.initial,
                "kernel": source.kernel.tolist()}
    return {"alphabet": list(source.alphabet.symbols), "states": source.states,
            "initial": source.initial, "kernel": source.kernel.tolist()}
