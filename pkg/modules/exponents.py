"""
Error-exponent computations

Expurgated exponent (general channel and the closed-form W_ε/Ŵ_ε family),
the single-sequence converse exponent, the critical crossover probability,
the rate threshold below which the two stay separated, and the sampled
curves behind the two published plots. All values are in nats; bits only
appear through ``ExponentCurve.to_unit``.
"""

import functools
import itertools
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import CONFIG
from core.errors import ExponentError, InputError, PreconditionError
from core.logger import get_logger
from modules.channels import Channel
from modules.optimize import golden_section_max

logger = get_logger(__name__)

Unit = Literal["nats", "bits"]
AbscissaKind = Literal["rate", "epsilon"]

CRITICAL_BRACKET = (1e-6, 0.1)
CRITICAL_TOL = 1e-13


class ExponentSearchConfig(BaseModel):
    rho_max: float = Field(default_factory=lambda: CONFIG.EXPONENT.RHO_MAX, ge=1.0)
    rel_tol: float = Field(default_factory=lambda: CONFIG.EXPONENT.REL_TOL, gt=0.0)
    abs_tol: float = Field(default_factory=lambda: CONFIG.EXPONENT.ABS_TOL, gt=0.0)
    q_grid: int = Field(default_factory=lambda: CONFIG.EXPONENT.Q_GRID, gt=0)
    q_grid_coarse: int = Field(default_factory=lambda: CONFIG.EXPONENT.Q_GRID_COARSE, gt=0)

    model_config = ConfigDict(frozen=True)

    @property
    def rho_tol(self) -> float:
        return max(self.abs_tol, self.rel_tol * self.rho_max)


def nats_to(value: float, unit: Unit) -> float:
    return value / math.log(2) if unit == "bits" else value


def to_nats(value: float, unit: Unit) -> float:
    return value * math.log(2) if unit == "bits" else value


class ExponentCurve(BaseModel):
    samples: List[Tuple[float, float]]
    abscissa_kind: AbscissaKind
    unit: Unit = "nats"
    label: str = ""

    model_config = ConfigDict(frozen=True)

    @field_validator("samples")
    @classmethod
    def _increasing(cls, samples):
        xs = [x for x, _ in samples]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("curve abscissas must be strictly increasing")
        return samples

    @property
    def abscissas(self) -> np.ndarray:
        return np.array([x for x, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    def to_unit(self, unit: Unit) -> "ExponentCurve":
        if unit == self.unit:
            return self
        scale = to_nats(1.0, self.unit) / to_nats(1.0, unit)
        x_scale = scale if self.abscissa_kind == "rate" else 1.0
        samples = [(x * x_scale, v * scale) for x, v in self.samples]
        return self.model_copy(update={"samples": samples, "unit": unit})

    def crossing(self, other: "ExponentCurve") -> Optional[float]:
        """First abscissa where ``self - other`` changes sign, linearly interpolated."""
        if other.unit != self.unit or other.abscissa_kind != self.abscissa_kind:
            other = other.to_unit(self.unit)
        xs = self.abscissas
        diff = self.values - np.interp(xs, other.abscissas, other.values)
        for k in range(len(xs)):
            if diff[k] == 0.0:
                return float(xs[k])
            if k + 1 < len(xs) and diff[k] * diff[k + 1] < 0:
                return float(xs[k] + (xs[k + 1] - xs[k]) * diff[k] / (diff[k] - diff[k + 1]))
        return None


def bhattacharyya_matrix(ch: Channel) -> np.ndarray:
    """B(x, x̄) = Σ_y √(W(y|x) W(y|x̄))."""
    root = np.sqrt(ch.matrix)
    return root @ root.T


def _simplex_grid(size: int, density: int) -> np.ndarray:
    if size == 2:
        q = np.linspace(0.0, 1.0, density + 1)
        return np.stack([q, 1.0 - q], axis=1)
    points = [
        c for c in itertools.product(range(density + 1), repeat=size - 1) if sum(c) <= density
    ]
    grid = np.array([list(c) + [density - sum(c)] for c in points], dtype=float)
    return grid / density


def _refine_input(kernel, q: np.ndarray, width: float, tol: float) -> np.ndarray:
    """Pairwise mass transfers around ``q`` that lower the quadratic form qᵀKq."""
    q = q.copy()
    for i, j in itertools.combinations(range(q.size), 2):
        lo, hi = max(-q[i], -width), min(q[j], width)

        def moved(t, i=i, j=j):
            trial = q.copy()
            trial[i] += t
            trial[j] -= t
            return trial

        best = golden_section_max(lambda t: -float(moved(t) @ kernel @ moved(t)), lo, hi, tol)
        if -best.value < float(q @ kernel @ q):
            q = moved(best.argmax)
    return q


def _max_over_inputs(kernel: np.ndarray, cfg: ExponentSearchConfig) -> Tuple[np.ndarray, float]:
    """Input distribution minimizing Σ Q(x)Q(x̄) K(x, x̄); returns (Q, minimum)."""
    size = kernel.shape[0]
    density = cfg.q_grid if size == 2 else cfg.q_grid_coarse
    grid = _simplex_grid(size, density)
    forms = np.einsum("ki,ij,kj->k", grid, kernel, grid)
    k = int(np.argmin(forms))
    q = _refine_input(kernel, grid[k], 1.0 / density, cfg.abs_tol)
    value = float(q @ kernel @ q)
    if value >= forms[k]:
        return grid[k], float(forms[k])
    return q, value


def rate_zero_expurgated_general(ch: Channel, cfg: Optional[ExponentSearchConfig] = None) -> float:
    """max_Q −Σ Q(x)Q(x̄) log B(x, x̄), the ρ → ∞ limit of the expurgated exponent."""
    cfg = cfg or ExponentSearchConfig()
    with np.errstate(divide="ignore"):
        log_b = np.log(bhattacharyya_matrix(ch))
    if np.any(np.isneginf(log_b)):
        # two inputs with disjoint output supports are never confused
        return math.inf
    _, value = _max_over_inputs(log_b, cfg)
    return -value


def expurgated_exponent(ch: Channel, rate: float, cfg: Optional[ExponentSearchConfig] = None) -> float:
    """sup_{ρ≥1} max_Q E_x(ρ, Q) − ρR for an arbitrary channel matrix."""
    cfg = cfg or ExponentSearchConfig()
    if rate < 0:
        raise InputError(f"rate must be nonnegative, got {rate}")
    if rate == 0:
        return rate_zero_expurgated_general(ch, cfg)
    bhatt = bhattacharyya_matrix(ch)

    def objective(rho: float) -> float:
        _, form = _max_over_inputs(bhatt ** (1.0 / rho), cfg)
        if not math.isfinite(form) or form <= 0:
            raise ExponentError(f"non-finite Bhattacharyya sum {form} at rho={rho}")
        return -rho * math.log(form) - rho * rate

    result = golden_section_max(objective, 1.0, cfg.rho_max, cfg.rho_tol)
    if result.at_upper_bound:
        logger.warning("rho search for %s at R=%g stopped at rho_max=%g", ch.name, rate, cfg.rho_max)
    return result.value


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps <= 1.0:
        raise InputError(f"eps out of range: {eps} is not in [0, 1]")


def _log_bhattacharyya(eps: float) -> float:
    """log 2√(ε(1−ε))."""
    return math.log(2.0) + 0.5 * (math.log(eps) + math.log1p(-eps))


def _family_ex(rho: float, log_z: float) -> float:
    # −ρ log(½[1 + z^{1/ρ}]) written to stay accurate for large ρ
    return -rho * math.log1p(0.5 * math.expm1(log_z / rho))


def expurgated_exponent_family(eps: float, rate: float, cfg: Optional[ExponentSearchConfig] = None) -> float:
    cfg = cfg or ExponentSearchConfig()
    _check_eps(eps)
    if rate < 0:
        raise InputError(f"rate must be nonnegative, got {rate}")
    if eps in (0.0, 1.0):
        return math.inf
    if rate == 0:
        return rate_zero_expurgated(eps)
    log_z = _log_bhattacharyya(eps)
    result = golden_section_max(lambda rho: _family_ex(rho, log_z) - rho * rate, 1.0, cfg.rho_max, cfg.rho_tol)
    if result.at_upper_bound:
        logger.warning("rho search for eps=%g at R=%g stopped at rho_max=%g", eps, rate, cfg.rho_max)
    return result.value


def rate_zero_expurgated(eps: float) -> float:
    _check_eps(eps)
    if eps in (0.0, 1.0):
        return math.inf
    return -0.5 * _log_bhattacharyya(eps)


def converse_exponent(eps: float) -> float:
    _check_eps(eps)
    if eps == 1.0:
        raise PreconditionError("the converse exponent is infinite at eps = 1")
    return -math.log((1.0 - eps) / 2.0)


def rate_zero_random_coding(eps: float) -> float:
    _check_eps(eps)
    return -math.log(0.5 + math.sqrt(eps * (1.0 - eps)))


@functools.lru_cache(maxsize=1)
def critical_epsilon() -> float:
    """Crossover probability where the converse meets the rate-zero expurgated exponent."""

    def gap(eps: float) -> float:
        return rate_zero_expurgated(eps) - converse_exponent(eps)

    lo, hi = CRITICAL_BRACKET
    while hi - lo > CRITICAL_TOL:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def separation_holds(eps: float) -> bool:
    """The converse lies strictly below the rate-zero expurgated exponent."""
    return converse_exponent(eps) < rate_zero_expurgated(eps)


def rate_threshold(eps: float, cfg: Optional[ExponentSearchConfig] = None) -> float:
    """Largest rate at which the family's expurgated exponent still exceeds the converse."""
    cfg = cfg or ExponentSearchConfig()
    _check_eps(eps)
    if eps == 0.0:
        return math.log(2.0)
    if eps >= critical_epsilon():
        raise PreconditionError(f"eps={eps} is not below the critical value; the rate threshold is not positive")
    log_converse = math.log((1.0 - eps) / 2.0)
    log_z = _log_bhattacharyya(eps)
    result = golden_section_max(
        lambda rho: (log_converse + _family_ex(rho, log_z)) / rho, 1.0, cfg.rho_max, cfg.rho_tol
    )
    if result.value <= 0:
        raise PreconditionError(f"eps={eps}: the rate threshold is not positive")
    return result.value


def separation_gap(eps: float, rate: float, cfg: Optional[ExponentSearchConfig] = None) -> float:
    return expurgated_exponent_family(eps, rate, cfg) - converse_exponent(eps)


def _curve(xs, fn, kind: AbscissaKind, label: str) -> ExponentCurve:
    samples = [(float(x), float(fn(x))) for x in xs]
    return ExponentCurve(
        samples=[(x, v) for x, v in samples if math.isfinite(v)], abscissa_kind=kind, unit="nats", label=label
    )


def curve_fig1(
    eps_min: float = 0.0, eps_max: Optional[float] = None, n_points: Optional[int] = None
) -> Tuple[ExponentCurve, ExponentCurve, ExponentCurve]:
    """Converse, rate-zero expurgated and rate-zero random-coding exponents against ε."""
    eps_max = critical_epsilon() if eps_max is None else eps_max
    n_points = n_points or CONFIG.FIGURES.FIG1_POINTS
    if not 0.0 <= eps_min < eps_max:
        raise InputError(f"empty eps range [{eps_min}, {eps_max}]")
    if eps_max > critical_epsilon():
        raise PreconditionError(f"eps_max={eps_max} exceeds the critical value {critical_epsilon():.16f}")
    if n_points < 2:
        raise InputError("a curve needs at least two points")
    grid = np.linspace(eps_min, eps_max, n_points)
    return (
        _curve(grid, converse_exponent, "epsilon", "converse"),
        _curve(grid, rate_zero_expurgated, "epsilon", "ml-expurgated"),
        _curve(grid, rate_zero_random_coding, "epsilon", "random-coding"),
    )


def curve_fig2(
    eps: float, rate_max: float, n_points: Optional[int] = None, cfg: Optional[ExponentSearchConfig] = None
) -> Tuple[ExponentCurve, ExponentCurve]:
    """E_ex(R, W_ε) on [0, rate_max] (nats) and the flat converse line."""
    n_points = n_points or CONFIG.FIGURES.FIG2_POINTS
    if not 0.0 < eps < critical_epsilon():
        raise PreconditionError(f"eps={eps} must lie in (0, {critical_epsilon():.16f})")
    if rate_max <= 0 or n_points < 2:
        raise InputError("fig2 needs a positive rate range and at least two points")
    cfg = cfg or ExponentSearchConfig()
    grid = np.linspace(0.0, rate_max, n_points)
    converse = converse_exponent(eps)
    return (
        _curve(grid, lambda r: expurgated_exponent_family(eps, r, cfg), "rate", "mmi-case"),
        _curve(grid, lambda r: converse, "rate", "mmi-converse"),
    )
