"""
Probability primitives over small finite alphabets

Everything here works in nats. Distributions are immutable numpy-backed
values; joint types keep integer counts so that marginals of a joint type
reproduce the types of its two sequences exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import AlphabetError, InputError

SIMPLEX_TOL = 1e-12

Alphabet = Tuple[str, ...]
BINARY: Alphabet = ("0", "1")
QUATERNARY: Alphabet = ("a", "b", "c", "d")


def as_alphabet(symbols: Union[str, Iterable[str]]) -> Alphabet:
    alphabet = tuple(symbols)
    if not alphabet:
        raise AlphabetError("alphabet is empty")
    if len(set(alphabet)) != len(alphabet):
        raise AlphabetError(f"alphabet {alphabet} repeats a symbol")
    return alphabet


def encode(seq: Sequence[str], alphabet: Alphabet) -> np.ndarray:
    """Map a symbol sequence to an index array over ``alphabet``."""
    lookup = {symbol: i for i, symbol in enumerate(alphabet)}
    try:
        return np.fromiter((lookup[s] for s in seq), dtype=np.int64, count=len(seq))
    except KeyError as e:
        raise AlphabetError(f"symbol {e.args[0]!r} is not in alphabet {alphabet}") from None


def decode_indices(indices: Iterable[int], alphabet: Alphabet) -> str:
    return "".join(alphabet[i] for i in indices)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float if array.dtype.kind == "f" else array.dtype, copy=True)
    array.setflags(write=False)
    return array


def _check_simplex(mass: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(mass)) or np.any(mass < 0):
        raise InputError(f"{what} has negative or non-finite entries")
    if abs(float(mass.sum()) - 1.0) > SIMPLEX_TOL:
        raise InputError(f"{what} sums to {float(mass.sum())!r}, not 1")


@dataclass(frozen=True, eq=False)
class ProbVec:
    mass: np.ndarray
    alphabet: Optional[Alphabet] = None

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 1 or mass.size == 0:
            raise InputError("a probability vector must be one-dimensional and nonempty")
        _check_simplex(mass, "probability vector")
        alphabet = None if self.alphabet is None else as_alphabet(self.alphabet)
        if alphabet is not None and len(alphabet) != mass.size:
            raise AlphabetError(f"{mass.size} masses for a {len(alphabet)}-symbol alphabet")
        object.__setattr__(self, "mass", _frozen(mass))
        object.__setattr__(self, "alphabet", alphabet)

    @classmethod
    def normalized(cls, weights: Sequence[float], alphabet: Optional[Alphabet] = None) -> "ProbVec":
        """Explicit renormalization; the constructor never rescales silently."""
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if not np.isfinite(total) or total <= 0:
            raise InputError("cannot normalize weights with non-positive total")
        return cls(weights / total, alphabet)

    @classmethod
    def uniform(cls, size: int, alphabet: Optional[Alphabet] = None) -> "ProbVec":
        return cls(np.full(size, 1.0 / size), alphabet)

    def __len__(self) -> int:
        return self.mass.size

    def __getitem__(self, symbol: Union[int, str]) -> float:
        if isinstance(symbol, str):
            if self.alphabet is None:
                raise AlphabetError("this probability vector has no alphabet")
            return float(self.mass[self.alphabet.index(symbol)])
        return float(self.mass[symbol])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVec):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.mass, other.mass)

    def __repr__(self) -> str:
        return f"ProbVec({np.round(self.mass, 6).tolist()}, alphabet={self.alphabet})"


@dataclass(frozen=True, eq=False)
class JointType:
    counts: np.ndarray
    n: int
    x_alphabet: Alphabet = BINARY
    y_alphabet: Alphabet = QUATERNARY

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.dtype.kind not in "iu":
            raise InputError("joint type counts must be a 2-D integer matrix")
        if np.any(counts < 0):
            raise InputError("joint type counts must be nonnegative")
        if self.n <= 0 or int(counts.sum()) != self.n:
            raise InputError(f"joint type counts sum to {int(counts.sum())}, expected n={self.n}")
        if counts.shape != (len(self.x_alphabet), len(self.y_alphabet)):
            raise AlphabetError(f"counts shape {counts.shape} does not match the alphabets")
        object.__setattr__(self, "counts", _frozen(counts.astype(np.int64)))
        object.__setattr__(self, "x_alphabet", as_alphabet(self.x_alphabet))
        object.__setattr__(self, "y_alphabet", as_alphabet(self.y_alphabet))

    def distribution(self) -> np.ndarray:
        return self.counts / self.n

    def marginal_x(self) -> ProbVec:
        return ProbVec(self.counts.sum(axis=1) / self.n, self.x_alphabet)

    def marginal_y(self) -> ProbVec:
        return ProbVec(self.counts.sum(axis=0) / self.n, self.y_alphabet)

    def __getitem__(self, pair: Tuple[str, str]) -> int:
        x, y = pair
        return int(self.counts[self.x_alphabet.index(x), self.y_alphabet.index(y)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointType):
            return NotImplemented
        return (
            self.n == other.n
            and self.x_alphabet == other.x_alphabet
            and self.y_alphabet == other.y_alphabet
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True, eq=False)
class JointDist3:
    """Distribution of (X, X̄, Y); axis order is (x, x̄, y)."""

    mass: np.ndarray
    alphabets: Tuple[Alphabet, Alphabet, Alphabet] = field(default=(BINARY, BINARY, BINARY))

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 3:
            raise InputError("a three-way joint distribution needs a 3-D array")
        _check_simplex(mass, "three-way joint distribution")
        object.__setattr__(self, "mass", _frozen(mass))

    def pair_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=2)

    def xy(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    def xbar_y(self) -> np.ndarray:
        return self.mass.sum(axis=0)

    def divergence(self, reference: np.ndarray) -> float:
        return kl_divergence(self.mass, reference)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointDist3):
            return NotImplemented
        return np.array_equal(self.mass, other.mass)


def type_of(seq: Sequence[str], alphabet: Union[str, Alphabet] = BINARY) -> ProbVec:
    alphabet = as_alphabet(alphabet)
    if len(seq) == 0:
        raise InputError("the type of an empty sequence is undefined")
    counts = np.bincount(encode(seq, alphabet), minlength=len(alphabet))
    return ProbVec(counts / len(seq), alphabet)


def type_counts(seq: Sequence[str], alphabet: Union[str, Alphabet] = BINARY) -> Tuple[int, ...]:
    """Integer composition of ``seq``; hashable, so it doubles as a type-class key."""
    alphabet = as_alphabet(alphabet)
    return tuple(int(c) for c in np.bincount(encode(seq, alphabet), minlength=len(alphabet)))


def joint_type(
    seq_a: Sequence[str],
    seq_b: Sequence[str],
    a_alphabet: Union[str, Alphabet] = BINARY,
    b_alphabet: Union[str, Alphabet] = QUATERNARY,
) -> JointType:
    a_alphabet, b_alphabet = as_alphabet(a_alphabet), as_alphabet(b_alphabet)
    if len(seq_a) != len(seq_b):
        raise InputError(f"sequence lengths differ: {len(seq_a)} vs {len(seq_b)}")
    if len(seq_a) == 0:
        raise InputError("the joint type of empty sequences is undefined")
    flat = encode(seq_a, a_alphabet) * len(b_alphabet) + encode(seq_b, b_alphabet)
    counts = np.bincount(flat, minlength=len(a_alphabet) * len(b_alphabet))
    return JointType(counts.reshape(len(a_alphabet), len(b_alphabet)), len(seq_a), a_alphabet, b_alphabet)


def _entropy_of(mass: np.ndarray) -> float:
    positive = mass[mass > 0]
    return float(-np.sum(positive * np.log(positive)))


def entropy(p: ProbVec) -> float:
    return _entropy_of(p.mass)


def mutual_information(jt: JointType) -> float:
    n = jt.n
    rows = jt.counts.sum(axis=1)
    cols = jt.counts.sum(axis=0)
    total = 0.0
    for (i, j), c in np.ndenumerate(jt.counts):
        if c:
            # integer products keep a factorized joint type at exactly zero
            total += c * math.log((int(c) * n) / (int(rows[i]) * int(cols[j])))
    return max(total / n, 0.0)


def conditional_entropy(jt: JointType) -> float:
    """H(X|Y) of the joint type."""
    return _entropy_of(jt.distribution().ravel()) - entropy(jt.marginal_y())


def mutual_information_array(table: np.ndarray) -> np.ndarray:
    """Mutual information over the last two axes of a batch of joint counts or distributions."""
    table = np.asarray(table, dtype=float)
    p = table / table.sum(axis=(-2, -1), keepdims=True)
    px = p.sum(axis=-1, keepdims=True)
    py = p.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p / (px * py)), 0.0)
    return np.maximum(terms.sum(axis=(-2, -1)), 0.0)


def binary_entropy(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise InputError(f"binary entropy argument {t} outside [0, 1]")
    return _entropy_of(np.array([t, 1.0 - t]))


def binary_divergence(p: float, q: float) -> float:
    """d(p‖q) in nats; ``math.inf`` when p puts mass where q has none."""
    if not 0.0 <= p <= 1.0 or not 0.0 <= q <= 1.0:
        raise InputError(f"binary divergence arguments ({p}, {q}) outside [0, 1]")
    return kl_divergence(np.array([p, 1.0 - p]), np.array([q, 1.0 - q]))


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InputError(f"divergence between shapes {p.shape} and {q.shape}")
    support = p > 0
    if np.any(q[support] <= 0):
        return math.inf
    return max(float(np.sum(p[support] * np.log(p[support] / q[support]))), 0.0)


def binary_divergence_array(p: np.ndarray, q: Union[float, np.ndarray]) -> np.ndarray:
    """Elementwise d(p‖q); inf where the support condition fails."""
    p = np.asarray(p, dtype=float)
    q = np.broadcast_to(np.asarray(q, dtype=float), p.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.where(p > 0, p * np.log(p / q), 0.0)
        second = np.where(p < 1, (1 - p) * np.log((1 - p) / (1 - q)), 0.0)
    return np.maximum(first + second, 0.0)
