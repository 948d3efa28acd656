"""
Rate-zero exponent of a type-dependent metric decoder

The exponent is a divergence minimization over joint distributions of
(X, X̄, Y) whose (X, X̄) marginal is the product Q×Q, constrained so that the
metric does not prefer the transmitted codeword. For binary channels the
feasible set is parametrized by four conditional masses

    α_{x x̄} = P(Y = 0 | X = x, X̄ = x̄),     ordered (α_00, α_01, α_10, α_11),

and the brute-force oracle grids them directly. For the BSC with the MMI
metric and uniform Q the minimizer is symmetric, which leaves two
parameters (γ₁, γ₂) and a closed form.
"""

import math
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import CONFIG
from core.errors import ExponentError, InputError
from core.logger import get_logger
from modules.channels import Channel
from modules.probkit import JointDist3, binary_divergence, binary_divergence_array, mutual_information_array

logger = get_logger(__name__)

Metric = Callable[[np.ndarray], np.ndarray]

MARGINAL_TOL = 1e-12


class SymmetricParams(BaseModel):
    gamma1: float = Field(ge=0.0, le=1.0)
    gamma2: float = Field(ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @property
    def feasible(self) -> bool:
        return (2 * self.gamma1 - 1) * (2 * self.gamma2 - 1) <= 0

    def to_alpha(self) -> "AlphaParams":
        return AlphaParams(alpha=(self.gamma1, self.gamma2, 1 - self.gamma2, 1 - self.gamma1))


class AlphaParams(BaseModel):
    alpha: Tuple[float, float, float, float]

    model_config = ConfigDict(frozen=True)

    @field_validator("alpha")
    @classmethod
    def _unit_interval(cls, alpha):
        if any(not 0.0 <= a <= 1.0 for a in alpha):
            raise ValueError(f"alpha entries must lie in [0, 1], got {alpha}")
        return alpha

    @property
    def u(self) -> float:
        a1, a2, a3, a4 = self.alpha
        return 0.25 * ((a1 + a2) - (a3 + a4))

    @property
    def v(self) -> float:
        a1, a2, a3, a4 = self.alpha
        return 0.25 * ((a1 + a3) - (a2 + a4))

    @property
    def S(self) -> float:
        return 0.25 * sum(self.alpha)

    def to_joint(self, q0: float = 0.5) -> JointDist3:
        """P(x, x̄, 0) = Q(x)Q(x̄)α_{x x̄} and P(x, x̄, 1) = Q(x)Q(x̄)(1 − α_{x x̄})."""
        q = np.array([q0, 1.0 - q0])
        pair = np.outer(q, q)
        alpha = np.array(self.alpha).reshape(2, 2)
        return JointDist3(np.stack([pair * alpha, pair * (1.0 - alpha)], axis=-1))


def feasibility_condition(a: AlphaParams) -> bool:
    """|u| ≤ |v|, the MMI constraint I(P_XY) ≤ I(P_X̄Y) under uniform Q."""
    return abs(a.u) <= abs(a.v) + 1e-15


def mmi_metric(table: np.ndarray) -> np.ndarray:
    """Mutual information of (a batch of) two-dimensional joint distributions."""
    return mutual_information_array(table)


def symmetrize(p: JointDist3) -> JointDist3:
    """½(P + Pˢ) with Pˢ(x, x̄, y) = P(1−x, 1−x̄, 1−y)."""
    if p.mass.shape != (2, 2, 2):
        raise InputError("symmetrization is defined for binary (X, X̄, Y)")
    if np.any(np.abs(p.pair_marginal() - 0.25) > MARGINAL_TOL):
        raise InputError("symmetrization needs the uniform product (X, X̄) marginal")
    return JointDist3(0.5 * (p.mass + p.mass[::-1, ::-1, ::-1]), p.alphabets)


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps out of range: {eps} is not in (0, 1)")


def symmetric_objective(g: SymmetricParams, eps: float) -> float:
    """[d(γ₁‖1−ε) + d(γ₂‖1−ε)] / 2."""
    _check_eps(eps)
    return 0.5 * (binary_divergence(g.gamma1, 1 - eps) + binary_divergence(g.gamma2, 1 - eps))


def optimal_symmetric_params(eps: float) -> SymmetricParams:
    # d(·‖1−ε) is convex with its zero at 1−ε, so each γ is 1−ε clamped to its half
    _check_eps(eps)
    return SymmetricParams(gamma1=min(1 - eps, 0.5), gamma2=max(1 - eps, 0.5))


def bsc_rate_zero_mmi_exponent(eps: float) -> float:
    """Rate-zero MMI exponent of BSC(ε) under uniform inputs; equals d(½‖ε)/2."""
    return symmetric_objective(optimal_symmetric_params(eps), eps)


class BruteForceResult(BaseModel):
    value: float
    alpha: AlphaParams
    q0: float
    grid_density: int
    evaluated: int


def _divergence(alpha: np.ndarray, q: np.ndarray, w0: np.ndarray) -> np.ndarray:
    """Σ Q(x)Q(x̄) d(α_{x x̄} ‖ W(0|x)) for a batch of (..., 2, 2) alpha arrays."""
    pair = np.outer(q, q)
    return np.sum(pair * binary_divergence_array(alpha, w0[:, None]), axis=(-2, -1))


def _constraint(alpha: np.ndarray, q: np.ndarray, metric: Metric, tol: float) -> np.ndarray:
    """q(P_XY) ≤ q(P_X̄Y) for a batch of alpha arrays."""
    # P(x, y=0) = Q(x) Σ_x̄ Q(x̄) α_{x x̄};  P(x̄, y=0) = Q(x̄) Σ_x Q(x) α_{x x̄}
    xy0 = q * np.einsum("...ij,j->...i", alpha, q)
    xbar_y0 = q * np.einsum("...ij,i->...j", alpha, q)
    p_xy = np.stack([xy0, q - xy0], axis=-1)
    p_xbar_y = np.stack([xbar_y0, q - xbar_y0], axis=-1)
    return metric(p_xy) <= metric(p_xbar_y) + tol


def _search(axes, q: np.ndarray, w0: np.ndarray, metric: Metric, tol: float) -> Tuple[float, np.ndarray, int]:
    """Minimum of the divergence over the product grid ``axes``, one slice of the first axis at a time."""
    best, best_alpha, evaluated = math.inf, None, 0
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, 3)
    for a00 in axes[0]:
        alpha = np.concatenate([np.full((rest.shape[0], 1), a00), rest], axis=1).reshape(-1, 2, 2)
        values = _divergence(alpha, q, w0)
        values[~_constraint(alpha, q, metric, tol)] = math.inf
        evaluated += values.size
        k = int(np.argmin(values))
        if values[k] < best:
            best, best_alpha = float(values[k]), alpha[k].ravel().copy()
    return best, best_alpha, evaluated


def bruteforce_minimizer(
    ch: Channel,
    q_metric: Metric = mmi_metric,
    grid_density: Optional[int] = None,
    q_fixed: Optional[float] = None,
) -> BruteForceResult:
    """
    Grid search for max_Q min D(P ‖ Q×Q×W) subject to q(P_XY) ≤ q(P_X̄Y).

    Each α axis is gridded at ``grid_density`` + 1 points; the minimizer for
    the best Q is then refined once on a grid of the same size spanning one
    coarse step on either side. Q is fixed when ``q_fixed`` is given and
    otherwise swept over the configured range.
    """
    if ch.shape != (2, 2):
        raise InputError("the brute-force oracle needs a binary-input, binary-output channel")
    settings = CONFIG.APPENDIX
    density = grid_density or settings.GRID_DENSITY
    if density < 1:
        raise InputError(f"grid density must be positive, got {density}")
    q_values = [q_fixed] if q_fixed is not None else np.linspace(settings.Q_MIN, settings.Q_MAX, settings.Q_POINTS)
    w0 = ch.matrix[:, 0]
    coarse = np.linspace(0.0, 1.0, density + 1)

    # the exponent is the best input distribution for the worst feasible P
    best, best_alpha, best_q, evaluated = -math.inf, None, None, 0
    for q0 in q_values:
        if not 0.0 < q0 < 1.0:
            raise InputError(f"input probability {q0} is not in (0, 1)")
        q = np.array([q0, 1.0 - q0])
        value, alpha, count = _search([coarse] * 4, q, w0, q_metric, settings.CONSTRAINT_TOL)
        evaluated += count
        if alpha is not None and value > best:
            best, best_alpha, best_q = value, alpha, q0
    if best_alpha is None:
        raise ExponentError(f"no grid point satisfies the metric constraint for {ch.name}")

    step = 1.0 / density
    fine = [np.linspace(max(0.0, a - step), min(1.0, a + step), density + 1) for a in best_alpha]
    q = np.array([best_q, 1.0 - best_q])
    value, alpha, count = _search(fine, q, w0, q_metric, settings.CONSTRAINT_TOL)
    evaluated += count
    if value < best:
        best, best_alpha = value, alpha
    logger.debug("brute force over %d grid points for %s: %.6g", evaluated, ch.name, best)

    alpha = AlphaParams(alpha=tuple(float(min(max(a, 0.0), 1.0)) for a in best_alpha))
    return BruteForceResult(value=best, alpha=alpha, q0=float(best_q), grid_density=density, evaluated=evaluated)


def rate_zero_metric_exponent_bruteforce(
    ch: Channel,
    q_metric: Metric = mmi_metric,
    grid_density: Optional[int] = None,
    q_fixed: Optional[float] = None,
) -> float:
    return bruteforce_minimizer(ch, q_metric, grid_density, q_fixed).value
