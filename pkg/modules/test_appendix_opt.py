import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import InputError
from modules.appendix_opt import (
    AlphaParams,
    SymmetricParams,
    bruteforce_minimizer,
    bsc_rate_zero_mmi_exponent,
    feasibility_condition,
    mmi_metric,
    optimal_symmetric_params,
    rate_zero_metric_exponent_bruteforce,
    symmetric_objective,
    symmetrize,
)
from modules.channels import make_bsc, make_w_eps
from modules.exponents import rate_zero_expurgated
from modules.probkit import binary_entropy

D_HALF_01 = 0.5108256237659907


def bsc_reference(eps):
    w = make_bsc(eps).matrix
    return 0.25 * np.broadcast_to(w[:, None, :], (2, 2, 2))


@pytest.mark.parametrize(
    "alpha,feasible",
    [((1, 0, 0, 1), True), ((0.9, 0.1, 0.5, 0.5), True), ((0.9, 0.5, 0.1, 0.5), False)],
)
def test_feasibility_examples(alpha, feasible):
    assert feasibility_condition(AlphaParams(alpha=alpha)) is feasible


def test_feasibility_matches_entropy_comparison():
    rng = np.random.default_rng(7)
    h = binary_entropy
    for alpha in rng.random((500, 4)):
        a = AlphaParams(alpha=tuple(alpha))
        if abs(abs(a.u) - abs(a.v)) < 1e-9:
            continue
        a1, a2, a3, a4 = alpha
        by_entropy = h((a1 + a2) / 2) + h((a3 + a4) / 2) >= h((a1 + a3) / 2) + h((a2 + a4) / 2)
        assert feasibility_condition(a) == by_entropy


def test_alpha_params_conditionals():
    rng = np.random.default_rng(5)
    for alpha in rng.random((200, 4)):
        a = AlphaParams(alpha=tuple(alpha))
        a1, a2, a3, a4 = alpha
        assert a.S + a.u == pytest.approx((a1 + a2) / 2) and a.S - a.u == pytest.approx((a3 + a4) / 2)
        assert a.S + a.v == pytest.approx((a1 + a3) / 2) and a.S - a.v == pytest.approx((a2 + a4) / 2)
        p = a.to_joint()
        # P(Y=0 | X=x) and P(Y=0 | X̄=x̄) under the uniform input
        assert (2 * p.xy()[:, 0]).tolist() == pytest.approx([a.S + a.u, a.S - a.u])
        assert (2 * p.xbar_y()[:, 0]).tolist() == pytest.approx([a.S + a.v, a.S - a.v])
        if abs(abs(a.u) - abs(a.v)) > 1e-9:
            assert feasibility_condition(a) == (mmi_metric(p.xy()) <= mmi_metric(p.xbar_y()))


def test_alpha_params_validation():
    with pytest.raises(ValidationError):
        AlphaParams(alpha=(0.1, 0.2, 1.5, 0.0))
    with pytest.raises(ValidationError):
        SymmetricParams(gamma1=-0.1, gamma2=0.5)


def test_gamma_feasibility_equivalence_on_a_grid():
    grid = [Fraction(k, 20) for k in range(21)]
    for g1 in grid:
        for g2 in grid:
            exact = abs(g1 + g2 - 1) <= abs(g1 - g2)
            params = SymmetricParams(gamma1=float(g1), gamma2=float(g2))
            assert params.feasible == exact
            assert feasibility_condition(params.to_alpha()) == exact


def test_symmetric_params_induce_a_symmetric_joint():
    p = SymmetricParams(gamma1=0.3, gamma2=0.8).to_alpha().to_joint()
    assert np.allclose(p.mass, p.mass[::-1, ::-1, ::-1])
    assert np.allclose(p.pair_marginal(), 0.25)
    assert symmetrize(p).mass == pytest.approx(p.mass)


def test_symmetrization_keeps_feasibility_and_lowers_divergence():
    rng = np.random.default_rng(2)
    reference = bsc_reference(0.2)
    for alpha in rng.random((200, 4)):
        a = AlphaParams(alpha=tuple(alpha))
        p = a.to_joint()
        sym = symmetrize(p)
        assert np.allclose(sym.mass, sym.mass[::-1, ::-1, ::-1])
        assert sym.divergence(reference) <= p.divergence(reference) + 1e-12
        back = AlphaParams(alpha=tuple(np.clip(4 * sym.mass[:, :, 0].ravel(), 0.0, 1.0)))
        assert abs(back.u) == pytest.approx(abs(a.u), abs=1e-12)
        assert abs(back.v) == pytest.approx(abs(a.v), abs=1e-12)


def test_symmetrize_needs_uniform_pair_marginal():
    with pytest.raises(InputError):
        symmetrize(AlphaParams(alpha=(0.5, 0.5, 0.5, 0.5)).to_joint(q0=0.3))


@pytest.mark.parametrize(
    "gamma1,gamma2,expected",
    [(0.9, 0.9, 0.0), (0.5, 0.9, D_HALF_01 / 2), (0.0, 1.0, (math.log(10) + math.log(10 / 9)) / 2)],
)
def test_symmetric_objective(gamma1, gamma2, expected):
    assert symmetric_objective(SymmetricParams(gamma1=gamma1, gamma2=gamma2), 0.1) == pytest.approx(expected, abs=1e-9)


def test_bsc_closed_form():
    assert bsc_rate_zero_mmi_exponent(0.1) == pytest.approx(0.2554128, abs=1e-7)
    assert bsc_rate_zero_mmi_exponent(0.5) == pytest.approx(0.0, abs=1e-15)
    assert bsc_rate_zero_mmi_exponent(0.9) == pytest.approx(bsc_rate_zero_mmi_exponent(0.1))
    assert optimal_symmetric_params(0.1) == SymmetricParams(gamma1=0.5, gamma2=0.9)
    with pytest.raises(InputError):
        bsc_rate_zero_mmi_exponent(0.0)


@pytest.mark.parametrize("eps", [0.001, 0.01, 0.05, 0.1, 0.3, 0.7])
def test_closed_form_is_the_rate_zero_expurgated_exponent(eps):
    assert bsc_rate_zero_mmi_exponent(eps) == pytest.approx(rate_zero_expurgated(eps), rel=1e-12)


def test_bruteforce_bsc_at_fine_grid():
    result = bruteforce_minimizer(make_bsc(0.1), grid_density=50, q_fixed=0.5)
    assert result.value == pytest.approx(D_HALF_01 / 2, abs=2e-3)
    assert result.q0 == 0.5 and result.grid_density == 50
    assert abs(result.alpha.u) <= abs(result.alpha.v) + 1e-9


def test_bruteforce_useless_channel():
    assert rate_zero_metric_exponent_bruteforce(make_bsc(0.5), q_fixed=0.5) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.1, 0.2, 0.3])
def test_bruteforce_agrees_with_closed_form(eps):
    value = rate_zero_metric_exponent_bruteforce(make_bsc(eps), grid_density=30, q_fixed=0.5)
    assert value == pytest.approx(bsc_rate_zero_mmi_exponent(eps), abs=5e-3)


@pytest.mark.slow
def test_bruteforce_sweeping_the_input_distribution():
    result = bruteforce_minimizer(make_bsc(0.1), grid_density=30)
    assert 0.0 < result.q0 < 1.0
    assert result.value == pytest.approx(D_HALF_01 / 2, abs=5e-3)


def test_bruteforce_rejects_non_binary_channels():
    with pytest.raises(InputError):
        bruteforce_minimizer(make_w_eps(0.1), q_fixed=0.5)
    with pytest.raises(InputError):
        bruteforce_minimizer(make_bsc(0.1), q_fixed=1.0)
