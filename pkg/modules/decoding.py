"""
Codebooks, decoders and block error probabilities

Decoders score every codeword in the log domain and pick the maximizer
(ML, MMI, any max-metric rule) or sample proportionally to the metric
(stochastic decoder). Error probabilities come either from exhaustive
enumeration of the output space or from Monte Carlo with one independent
stream per message. Message indices are 0-based throughout.
"""

import itertools
import math
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf, model_validator

from core.config import CONFIG
from core.errors import AlphabetError, BudgetExceededError, CodebookError, DecodingError, InputError, VerificationError
from core.logger import get_logger
from modules.channels import Channel, log_likelihoods, make_w_eps, make_w_hat_eps, product_prob
from modules.construction import build_y_tilde, partner_index, pair_mutual_informations, y_kappa
from modules.probkit import (
    BINARY,
    QUATERNARY,
    Alphabet,
    as_alphabet,
    decode_indices,
    encode,
    mutual_information_array,
    type_counts,
)

logger = get_logger(__name__)

DecoderKind = Literal["ml", "mmi", "max_metric", "stochastic_metric"]
TiePolicy = Literal["lowest_index", "error", "random"]
MetricName = Literal["likelihood", "mmi"]

THEOREM_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: Tuple[str, ...]
    alphabet: Alphabet = BINARY

    def __post_init__(self):
        codewords = tuple(str(c) for c in self.codewords)
        if not codewords:
            raise CodebookError("a codebook needs at least one codeword")
        lengths = {len(c) for c in codewords}
        if len(lengths) != 1 or 0 in lengths:
            raise CodebookError(f"codewords must share one positive length, got lengths {sorted(lengths)}")
        alphabet = as_alphabet(self.alphabet)
        stray = set("".join(codewords)) - set(alphabet)
        if stray:
            raise CodebookError(f"symbols {sorted(stray)} are not in the input alphabet {alphabet}")
        object.__setattr__(self, "codewords", codewords)
        object.__setattr__(self, "alphabet", alphabet)

    @classmethod
    def from_lines(cls, lines: Iterable[str], alphabet: Alphabet = BINARY) -> "Codebook":
        """One codeword per line; blank lines and '#' comments are skipped."""
        codewords = []
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if line:
                codewords.append(line)
        return cls(tuple(codewords), alphabet)

    @classmethod
    def demo(cls, n: int) -> "Codebook":
        """First three weight-⌊n/2⌋ binary words in lexicographic order, no two of them complementary."""
        if n < 3:
            raise CodebookError(f"demo codebooks need n >= 3, got {n}")
        weight = n // 2
        chosen: List[str] = []
        for bits in itertools.product("01", repeat=n):
            word = "".join(bits)
            if word.count("1") != weight:
                continue
            complement = word.translate(str.maketrans("01", "10"))
            if complement in chosen:
                continue
            chosen.append(word)
            if len(chosen) == 3:
                break
        return cls(tuple(chosen), BINARY)

    @property
    def M(self) -> int:
        return len(self.codewords)

    @property
    def n(self) -> int:
        return len(self.codewords[0])

    @property
    def rate(self) -> float:
        """log(M)/n in nats per channel use."""
        return math.log(self.M) / self.n

    @cached_property
    def indices(self) -> np.ndarray:
        rows = np.stack([encode(c, self.alphabet) for c in self.codewords])
        rows.setflags(write=False)
        return rows

    def types(self) -> List[Tuple[int, ...]]:
        return [type_counts(c, self.alphabet) for c in self.codewords]

    @property
    def constant_composition(self) -> bool:
        return len(set(self.types())) == 1

    def subcode(self, members: Sequence[int]) -> "Codebook":
        return Codebook(tuple(self.codewords[m] for m in members), self.alphabet)

    def __len__(self) -> int:
        return self.M

    def __getitem__(self, m: int) -> str:
        return self.codewords[m]

    def __iter__(self) -> Iterator[str]:
        return iter(self.codewords)

    def __repr__(self) -> str:
        return f"Codebook({list(self.codewords)})"


class DecodingMetric(ABC):
    """A nonnegative decoding metric q(x, y), evaluated as log q."""

    name: str = "metric"

    @abstractmethod
    def log_scores(self, cb: Codebook, outputs: np.ndarray, output_size: int) -> np.ndarray:
        """(N, M) array of log q(x_m, y) for an (N, n) batch of output indices."""


class LikelihoodMetric(DecodingMetric):
    name = "likelihood"

    def __init__(self, channel: Channel):
        self.channel = channel

    def log_scores(self, cb: Codebook, outputs: np.ndarray, output_size: int) -> np.ndarray:
        _check_inputs(cb, self.channel)
        if output_size != len(self.channel.output_alphabet):
            raise AlphabetError("output alphabet does not match the likelihood channel")
        return log_likelihoods(self.channel, cb.indices, outputs)


class MutualInformationMetric(DecodingMetric):
    """log q = n · I(P̂_{x y}); the exponentiated metric is exp(n · empirical MI)."""

    name = "mmi"

    def log_scores(self, cb: Codebook, outputs: np.ndarray, output_size: int) -> np.ndarray:
        n_out, n = outputs.shape
        cells = len(cb.alphabet) * output_size
        flat = cb.indices[None, :, :] * output_size + outputs[:, None, :]
        counts = np.zeros((n_out, cb.M, cells))
        rows, cols = np.arange(n_out)[:, None], np.arange(cb.M)[None, :]
        for position in range(n):
            counts[rows, cols, flat[:, :, position]] += 1
        table = counts.reshape(n_out, cb.M, len(cb.alphabet), output_size)
        return n * mutual_information_array(table)


class CallableMetric(DecodingMetric):
    """Wraps ``fn(codeword, output) -> q >= 0`` over symbol strings."""

    def __init__(self, fn: Callable[[str, str], float], output_alphabet: Alphabet = QUATERNARY, name: str = "custom"):
        self.fn = fn
        self.output_alphabet = as_alphabet(output_alphabet)
        self.name = name

    def log_scores(self, cb: Codebook, outputs: np.ndarray, output_size: int) -> np.ndarray:
        if output_size != len(self.output_alphabet):
            raise AlphabetError("output alphabet does not match the metric")
        scores = np.empty((outputs.shape[0], cb.M))
        for k, row in enumerate(outputs):
            y = decode_indices(row, self.output_alphabet)
            for m, x in enumerate(cb.codewords):
                value = float(self.fn(x, y))
                if value < 0 or math.isnan(value):
                    raise InputError(f"metric {self.name} returned {value} for ({x}, {y})")
                scores[k, m] = math.log(value) if value > 0 else -math.inf
        return scores


def _check_inputs(cb: Codebook, ch: Channel) -> None:
    if cb.alphabet != ch.input_alphabet:
        raise AlphabetError(f"codebook alphabet {cb.alphabet} differs from channel inputs {ch.input_alphabet}")


class DecoderSpec(BaseModel):
    kind: DecoderKind
    metric: Optional[Union[MetricName, InstanceOf[DecodingMetric]]] = None
    tie_policy: TiePolicy = "lowest_index"
    channel: Optional[InstanceOf[Channel]] = None
    output_alphabet: Tuple[str, ...] = QUATERNARY

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _metric_for_kind(self):
        if self.kind in ("max_metric", "stochastic_metric") and self.metric is None:
            raise ValueError(f"decoder kind {self.kind} needs a metric")
        return self

    def resolve_metric(self, fallback: Optional[Channel] = None) -> DecodingMetric:
        """The metric to score with; the attached channel wins over ``fallback``."""
        if self.kind == "mmi":
            return MutualInformationMetric()
        metric = "likelihood" if self.kind == "ml" else self.metric
        if isinstance(metric, DecodingMetric):
            return metric
        if metric == "mmi":
            return MutualInformationMetric()
        channel = self.channel or fallback
        if channel is None:
            raise InputError("a likelihood decoder needs a channel")
        return LikelihoodMetric(channel)

    @property
    def stochastic(self) -> bool:
        return self.kind == "stochastic_metric"


@dataclass(frozen=True)
class Tie:
    candidates: Tuple[int, ...]


def _tie_sets(scores: np.ndarray, tol: float) -> np.ndarray:
    best = scores.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        return scores >= best - tol


def _stochastic_weights(scores: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Row-wise softmax of log-metrics; also returns the rows where the metric vanishes everywhere."""
    best = scores.max(axis=1, keepdims=True)
    undefined = np.isneginf(best[:, 0])
    shifted = np.where(undefined[:, None], 0.0, scores - np.where(undefined[:, None], 0.0, best))
    weights = np.exp(shifted)
    weights /= weights.sum(axis=1, keepdims=True)
    weights[undefined] = 0.0
    return weights, undefined


def decision_matrix(scores: np.ndarray, spec: DecoderSpec, tie_tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Probability that each output row is decoded to each message.

    ``lowest_index`` is one-hot at the lowest maximizer, ``error`` leaves a
    tied row at zero (every message counts as an error), ``random`` spreads
    uniformly over the tie set. The second array flags rows on which a
    stochastic decoder is undefined.
    """
    if spec.stochastic:
        return _stochastic_weights(scores)
    tied = _tie_sets(scores, tie_tol)
    undefined = np.zeros(scores.shape[0], dtype=bool)
    if spec.tie_policy == "random":
        return tied / tied.sum(axis=1, keepdims=True), undefined
    decision = np.zeros_like(scores)
    first = tied.argmax(axis=1)
    if spec.tie_policy == "error":
        unique = tied.sum(axis=1) == 1
        decision[np.flatnonzero(unique), first[unique]] = 1.0
    else:
        decision[np.arange(scores.shape[0]), first] = 1.0
    return decision, undefined


def decode(
    spec: DecoderSpec,
    cb: Codebook,
    y: Sequence[str],
    channel: Optional[Channel] = None,
    rng: Optional[np.random.Generator] = None,
) -> Union[int, Tie, np.ndarray]:
    """
    Decode a single output sequence.

    Deterministic decoders return the decoded index, or a ``Tie`` under the
    ``error`` policy; the stochastic decoder returns its distribution over
    messages.
    """
    ch = spec.channel or channel
    alphabet = ch.output_alphabet if ch is not None else as_alphabet(spec.output_alphabet)
    if len(y) != cb.n:
        raise InputError(f"output length {len(y)} does not match blocklength {cb.n}")
    outputs = encode(y, alphabet)[None, :]
    scores = spec.resolve_metric(ch).log_scores(cb, outputs, len(alphabet))
    if spec.stochastic:
        weights, undefined = _stochastic_weights(scores)
        if undefined[0]:
            raise DecodingError(f"the metric vanishes on every codeword for output {''.join(y)}")
        return weights[0]
    candidates = tuple(int(m) for m in np.flatnonzero(_tie_sets(scores, CONFIG.DECODING.TIE_TOL)[0]))
    if len(candidates) == 1 or spec.tie_policy == "lowest_index":
        return candidates[0]
    if spec.tie_policy == "error":
        return Tie(candidates)
    rng = rng or np.random.default_rng(CONFIG.DECODING.SEED)
    return int(rng.choice(candidates))


class ErrorReport(BaseModel):
    per_message: List[float]
    average: float
    maximal: float
    method: Literal["exact_enumeration", "monte_carlo"]
    n_samples: Optional[int] = None
    half_width: Optional[float] = None
    half_widths: Optional[List[float]] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _consistent(self):
        if not self.per_message:
            raise ValueError("an error report needs at least one message")
        if any(not 0.0 <= p <= 1.0 for p in self.per_message):
            raise ValueError("error probabilities must lie in [0, 1]")
        if abs(self.average - math.fsum(self.per_message) / len(self.per_message)) > 1e-12:
            raise ValueError("average does not match the per-message probabilities")
        if self.maximal != max(self.per_message):
            raise ValueError("maximal does not match the per-message probabilities")
        return self

    @classmethod
    def from_per_message(cls, per_message: Sequence[float], method: str, **extra) -> "ErrorReport":
        per_message = [min(max(float(p), 0.0), 1.0) for p in per_message]
        return cls(
            per_message=per_message,
            average=math.fsum(per_message) / len(per_message),
            maximal=max(per_message),
            method=method,
            **extra,
        )


def _output_chunks(size: int, n: int, chunk: int) -> Iterator[np.ndarray]:
    """All size**n output sequences in mixed-radix order, first position most significant."""
    weights = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    total = size**n
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (flat[:, None] // weights[None, :]) % size


def exact_error(
    spec: DecoderSpec,
    cb: Codebook,
    ch: Optional[Channel] = None,
    budget: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> ErrorReport:
    ch = ch or spec.channel
    if ch is None:
        raise InputError("exact error computation needs the channel the codewords are sent over")
    _check_inputs(cb, ch)
    budget = budget or CONFIG.DECODING.ENUMERATION_BUDGET
    size = len(ch.output_alphabet)
    if size**cb.n > budget:
        raise BudgetExceededError(
            f"{size}^{cb.n} outputs exceed the enumeration budget of {budget}; use Monte Carlo instead"
        )
    metric = spec.resolve_metric(ch)
    logger.debug("enumerating %d outputs for M=%d, n=%d with %s", size**cb.n, cb.M, cb.n, metric.name)

    partial: List[np.ndarray] = []
    for outputs in _output_chunks(size, cb.n, chunk_size or CONFIG.DECODING.CHUNK_SIZE):
        probs = np.exp(log_likelihoods(ch, cb.indices, outputs))
        decision, undefined = decision_matrix(metric.log_scores(cb, outputs, size), spec, CONFIG.DECODING.TIE_TOL)
        if np.any(probs[undefined] > 0):
            raise DecodingError("the stochastic decoder is undefined on an output of positive probability")
        partial.append(np.sum(probs * (1.0 - decision), axis=0))

    stacked = np.array(partial)
    per_message = [math.fsum(stacked[:, m]) for m in range(cb.M)]
    return ErrorReport.from_per_message(per_message, "exact_enumeration")


def _inverse_cdf(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index drawn by ``u`` in [0, 1) from rows of cumulative sums; zero-mass entries are never returned."""
    # the last column becomes exactly 1.0, so u < 1 never runs past the last nonzero entry
    normalized = cumulative / cumulative[..., -1:]
    return (u[..., None] >= normalized).sum(axis=-1)


def _sample_outputs(ch: Channel, codeword: np.ndarray, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    cumulative = np.cumsum(ch.matrix, axis=1)[codeword]
    return _inverse_cdf(cumulative, rng.random((n_samples, codeword.size)))


def monte_carlo_error(
    spec: DecoderSpec,
    cb: Codebook,
    ch: Optional[Channel] = None,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> ErrorReport:
    ch = ch or spec.channel
    if ch is None:
        raise InputError("Monte Carlo estimation needs the channel the codewords are sent over")
    _check_inputs(cb, ch)
    n_samples = CONFIG.DECODING.MC_SAMPLES if n_samples is None else n_samples
    seed = CONFIG.DECODING.SEED if seed is None else seed
    if n_samples < 1:
        raise InputError(f"n_samples must be at least 1, got {n_samples}")
    metric = spec.resolve_metric(ch)
    size = len(ch.output_alphabet)
    sampled = spec.stochastic or spec.tie_policy == "random"
    chunk = CONFIG.DECODING.CHUNK_SIZE

    per_message = []
    for m in range(cb.M):
        rng = np.random.default_rng([seed, m])
        errors = 0
        for start in range(0, n_samples, chunk):
            count = min(chunk, n_samples - start)
            outputs = _sample_outputs(ch, cb.indices[m], count, rng)
            decision, undefined = decision_matrix(metric.log_scores(cb, outputs, size), spec, CONFIG.DECODING.TIE_TOL)
            if np.any(undefined):
                raise DecodingError("the stochastic decoder is undefined on a sampled output")
            if sampled:
                chosen = _inverse_cdf(np.cumsum(decision, axis=1), rng.random(count))
                errors += int(np.sum(chosen != m))
            else:
                errors += int(np.sum(decision[:, m] < 0.5))
        per_message.append(errors / n_samples)

    z = CONFIG.DECODING.CONFIDENCE_Z
    variances = [p * (1.0 - p) / n_samples for p in per_message]
    return ErrorReport.from_per_message(
        per_message,
        "monte_carlo",
        n_samples=n_samples,
        half_widths=[z * math.sqrt(v) for v in variances],
        half_width=z * math.sqrt(math.fsum(variances)) / len(per_message),
    )


def empirical_exponent(report: ErrorReport, n: int, which: Literal["average", "maximal"] = "average") -> float:
    """−(1/n) log p_e; +inf when the error probability is zero."""
    if n < 1:
        raise InputError(f"blocklength must be positive, got {n}")
    p = report.average if which == "average" else report.maximal
    if p <= 0:
        logger.warning("%s error probability is zero; the empirical exponent is infinite", which)
        return math.inf
    return max(-math.log(p) / n, 0.0)


def exponent_ceiling(eps: float, n: int) -> float:
    """Finite-n ceiling on the MMI exponent over W_ε: −log((1−ε)/2) + (1/n) log((1−ε)/ε)."""
    if not 0.0 < eps < 1.0 or n < 1:
        raise InputError(f"exponent ceiling needs eps in (0, 1) and n >= 1, got eps={eps}, n={n}")
    return -math.log((1.0 - eps) / 2.0) + math.log((1.0 - eps) / eps) / n


def mmi_floor_bound(eps: float, n: int) -> float:
    """((1−ε)/2)^n · ε/(1−ε), the probability of ỹ given the transmitted codeword."""
    return ((1.0 - eps) / 2.0) ** n * eps / (1.0 - eps)


class MessageComparison(BaseModel):
    message: int
    deterministic: float
    stochastic: float
    holds: bool


def stochastic_vs_deterministic(
    cb: Codebook, metric: Union[MetricName, DecodingMetric], ch: Channel
) -> List[MessageComparison]:
    """
    Exact per-message errors of the max-metric decoder (ties counted as
    errors) and of its stochastic companion; raises if any message violates
    p_det <= 2 p_stoch.
    """
    deterministic = exact_error(DecoderSpec(kind="max_metric", metric=metric, tie_policy="error"), cb, ch)
    stochastic = exact_error(DecoderSpec(kind="stochastic_metric", metric=metric), cb, ch)
    records = [
        MessageComparison(message=m, deterministic=d, stochastic=s, holds=d <= 2.0 * s + THEOREM_SLACK)
        for m, (d, s) in enumerate(zip(deterministic.per_message, stochastic.per_message))
    ]
    broken = [r.message for r in records if not r.holds]
    if broken:
        raise VerificationError(f"factor-2 bound fails for messages {broken} of {cb}")
    return records


def extract_constant_composition(cb: Codebook) -> Codebook:
    """Largest same-type subcode; equal-sized classes resolve to the lexicographically smallest type."""
    classes: Dict[Tuple[int, ...], List[int]] = defaultdict(list)
    for m, t in enumerate(cb.types()):
        classes[t].append(m)
    key = min(classes, key=lambda t: (-len(classes[t]), t))
    if len(classes[key]) == cb.M:
        return cb
    return cb.subcode(classes[key])


class FloorRecord(BaseModel):
    message: int
    partner: int
    y_tilde: str
    modified_index: int
    mi_message: float
    mi_partner: float
    y_tilde_prob: float
    error_prob: float
    holds: bool


def mmi_error_floor(cb: Codebook, eps: float, tie_policy: TiePolicy = "lowest_index") -> List[FloorRecord]:
    """
    Exact MMI error probabilities over W_ε next to the constructed lower
    bound p_{e,m} >= W^n(ỹ|x_m) for every message.
    """
    if not cb.constant_composition:
        raise CodebookError("the error floor is stated for constant-composition codebooks")
    channel = make_w_eps(eps)
    report = exact_error(DecoderSpec(kind="mmi", tie_policy=tie_policy), cb, channel)
    records = []
    for m in range(cb.M):
        partner = partner_index(cb.codewords, m)
        pair = build_y_tilde(cb[m], cb[partner])
        mi_m, mi_partner = pair_mutual_informations(pair)
        floor = product_prob(channel, cb[m], pair.y_tilde)
        records.append(
            FloorRecord(
                message=m,
                partner=partner,
                y_tilde=pair.y_tilde,
                modified_index=pair.modified_index,
                mi_message=mi_m,
                mi_partner=mi_partner,
                y_tilde_prob=floor,
                error_prob=report.per_message[m],
                holds=report.per_message[m] >= floor * (1.0 - 1e-12),
            )
        )
    return records


class UniversalityRecord(BaseModel):
    y_kappa: str
    decision: Union[int, Tuple[int, ...]]
    forced: bool
    max_error_hat: float
    bound: float
    holds: bool


def universality_check(spec: DecoderSpec, cb: Codebook, eps: float) -> UniversalityRecord:
    """
    Decode y_κ(x_1, x_2) with a decoder tuned to W_ε; when it picks message 0
    the same decoder must have p_{e,max} >= ((1−ε)/2)^n over Ŵ_ε.
    """
    if cb.M < 2:
        raise CodebookError("the universality harness needs at least two codewords")
    if spec.stochastic:
        raise InputError("the universality harness applies to deterministic decoders")
    tuned = make_w_eps(eps)
    y = y_kappa(cb[0], cb[1])
    decision = decode(spec, cb, y, channel=tuned)
    forced = decision == 0
    # likelihood metrics stay tuned to W_ε while the codewords travel over Ŵ_ε
    fixed = spec if spec.channel is not None or spec.kind == "mmi" else spec.model_copy(update={"channel": tuned})
    report = exact_error(fixed, cb, make_w_hat_eps(eps))
    bound = ((1.0 - eps) / 2.0) ** cb.n
    return UniversalityRecord(
        y_kappa=y,
        decision=decision.candidates if isinstance(decision, Tie) else int(decision),
        forced=bool(forced),
        max_error_hat=report.maximal,
        bound=bound,
        holds=(not forced) or report.maximal >= bound * (1.0 - 1e-12),
    )
