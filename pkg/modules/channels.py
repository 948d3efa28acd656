"""
Discrete memoryless channels

Channels are immutable row-stochastic matrices with explicit input and
output alphabets. The counterexample family uses the quaternary outputs in
the canonical order (a, b, c, d), which is also the column order.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from core.errors import ChannelError, InputError
from modules.probkit import BINARY, QUATERNARY, Alphabet, as_alphabet, encode

ROW_TOL = 1e-12
RAW_PRODUCT_MAX_N = 32


@dataclass(frozen=True, eq=False)
class Channel:
    matrix: np.ndarray
    input_alphabet: Alphabet = BINARY
    output_alphabet: Alphabet = QUATERNARY
    name: str = "custom"

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float, copy=True)
        inputs = as_alphabet(self.input_alphabet)
        outputs = as_alphabet(self.output_alphabet)
        if matrix.shape != (len(inputs), len(outputs)):
            raise ChannelError(f"matrix shape {matrix.shape} does not match |X|={len(inputs)}, |Y|={len(outputs)}")
        if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
            raise ChannelError("channel entries must be finite and nonnegative")
        bad = np.flatnonzero(np.abs(matrix.sum(axis=1) - 1.0) > ROW_TOL)
        if bad.size:
            raise ChannelError(f"rows {bad.tolist()} do not sum to 1")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "input_alphabet", inputs)
        object.__setattr__(self, "output_alphabet", outputs)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def __call__(self, y: str, x: str) -> float:
        """W(y|x)."""
        return float(self.matrix[self.input_alphabet.index(x), self.output_alphabet.index(y)])

    def swap_outputs(self, first: str, second: str, name: str = "custom") -> "Channel":
        i, j = self.output_alphabet.index(first), self.output_alphabet.index(second)
        order = list(range(len(self.output_alphabet)))
        order[i], order[j] = j, i
        return Channel(self.matrix[:, order], self.input_alphabet, self.output_alphabet, name)

    def log_matrix(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.matrix)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Channel):
            return NotImplemented
        return (
            self.input_alphabet == other.input_alphabet
            and self.output_alphabet == other.output_alphabet
            and np.array_equal(self.matrix, other.matrix)
        )

    def __repr__(self) -> str:
        return f"Channel({self.name}, {self.matrix.tolist()})"


def _check_eps(eps: float) -> float:
    if not 0.0 <= eps <= 1.0:
        raise InputError(f"eps out of range: {eps} is not in [0, 1]")
    return float(eps)


def make_w_eps(eps: float) -> Channel:
    eps = _check_eps(eps)
    hi, lo = (1 - eps) / 2, eps / 2
    return Channel(np.array([[hi, hi, lo, lo], [lo, lo, hi, hi]]), BINARY, QUATERNARY, f"w_eps({eps})")


def make_w_hat_eps(eps: float) -> Channel:
    """W_ε with the output symbols b and c exchanged."""
    return make_w_eps(eps).swap_outputs("b", "c", name=f"w_hat_eps({_check_eps(eps)})")


def make_bsc(eps: float) -> Channel:
    eps = _check_eps(eps)
    return Channel(np.array([[1 - eps, eps], [eps, 1 - eps]]), BINARY, BINARY, f"bsc({eps})")


def _aligned(ch: Channel, x: Sequence[str], y: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    if len(x) != len(y):
        raise InputError(f"input and output lengths differ: {len(x)} vs {len(y)}")
    return encode(x, ch.input_alphabet), encode(y, ch.output_alphabet)


def log_product_prob(ch: Channel, x: Sequence[str], y: Sequence[str]) -> float:
    """log W^n(y|x); ``-inf`` when some letter has zero probability."""
    xi, yi = _aligned(ch, x, y)
    return float(np.sum(ch.log_matrix()[xi, yi]))


def product_prob(ch: Channel, x: Sequence[str], y: Sequence[str]) -> float:
    xi, yi = _aligned(ch, x, y)
    if len(xi) <= RAW_PRODUCT_MAX_N:
        return math.prod(ch.matrix[xi, yi].tolist())
    return math.exp(log_product_prob(ch, x, y))


def log_likelihoods(ch: Channel, codewords: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """
    log W^n(y|x_m) for a batch of outputs against every codeword.

    ``codewords`` is an (M, n) index array and ``outputs`` an (N, n) index
    array; the result has shape (N, M).
    """
    logw = ch.log_matrix()
    # (N, M, n) gather, summed over positions
    return logw[codewords[None, :, :], outputs[:, None, :]].sum(axis=2)


