import itertools
import math

import numpy as np
import pytest

from core.errors import AlphabetError, InputError
from modules.probkit import (
    BINARY,
    QUATERNARY,
    JointType,
    ProbVec,
    binary_divergence,
    binary_entropy,
    conditional_entropy,
    encode,
    entropy,
    joint_type,
    kl_divergence,
    mutual_information,
    mutual_information_array,
    type_counts,
    type_of,
)

LOG2 = math.log(2)


def test_type_of_balanced_sequence():
    p = type_of("0011")
    assert p["0"] == 0.5 and p["1"] == 0.5
    assert entropy(p) == pytest.approx(LOG2)


def test_type_counts_is_hashable_key():
    assert type_counts("0011") == type_counts("0101") == (2, 2)
    assert type_counts("0001") == (3, 1)


def test_encode_rejects_foreign_symbol():
    with pytest.raises(AlphabetError):
        encode("01x", BINARY)


@pytest.mark.parametrize(
    "x,y,expected",
    [
        ("0011", "abcd", LOG2),
        ("0011", "abad", 0.5 * LOG2),
        ("0101", "aabb", 0.0),
    ],
)
def test_mutual_information_examples(x, y, expected):
    assert mutual_information(joint_type(x, y)) == pytest.approx(expected, abs=1e-15)


def test_joint_type_marginals_match_sequence_types():
    jt = joint_type("011010", "abddca")
    assert jt.marginal_x() == type_of("011010")
    assert jt.marginal_y() == type_of("abddca", QUATERNARY)
    assert jt[("0", "a")] == 2
    assert jt.n == 6


def test_joint_type_length_mismatch():
    with pytest.raises(InputError):
        joint_type("01", "abc")


def test_joint_type_rejects_inconsistent_counts():
    with pytest.raises(InputError):
        JointType(np.array([[1, 0, 0, 0], [0, 1, 0, 0]]), 3)


def test_conditional_entropy_vanishes_when_output_determines_input():
    assert conditional_entropy(joint_type("0011", "abcd")) == pytest.approx(0.0, abs=1e-15)
    # H(X|Y) = P(a) h(1/2) for "abad"
    assert conditional_entropy(joint_type("0011", "abad")) == pytest.approx(0.5 * LOG2)


def test_mutual_information_array_matches_scalar():
    rng = np.random.default_rng(3)
    letters = np.array(list("abcd"))
    for _ in range(20):
        x = "".join(rng.choice(["0", "1"], size=7))
        y = "".join(rng.choice(letters, size=7))
        jt = joint_type(x, y)
        assert mutual_information_array(jt.counts) == pytest.approx(mutual_information(jt), abs=1e-12)


def test_binary_divergence_values():
    assert binary_divergence(0.5, 0.1) == pytest.approx(0.5108256237659907)
    assert binary_divergence(0.3, 0.3) == 0.0
    assert binary_divergence(1.0, 0.0) == math.inf
    assert binary_divergence(0.0, 0.0) == 0.0


def test_kl_divergence_shape_mismatch():
    with pytest.raises(InputError):
        kl_divergence(np.array([0.5, 0.5]), np.array([1.0]))


def test_binary_entropy_bounds():
    assert binary_entropy(0.5) == pytest.approx(LOG2)
    assert binary_entropy(0.0) == 0.0
    with pytest.raises(InputError):
        binary_entropy(1.5)


def test_probvec_validation_and_normalization():
    with pytest.raises(InputError):
        ProbVec(np.array([0.5, 0.6]))
    p = ProbVec.normalized([1, 3], BINARY)
    assert p["1"] == pytest.approx(0.75)
    assert ProbVec.uniform(4).mass.tolist() == [0.25] * 4
    with pytest.raises(ValueError):
        p.mass[0] = 1.0


def _sequences(alphabet, n):
    return ["".join(s) for s in itertools.product(alphabet, repeat=n)]


def _check_all_joint_types(n):
    for x in _sequences(BINARY, n):
        for y in _sequences(QUATERNARY, n):
            jt = joint_type(x, y)
            assert jt.marginal_x() == type_of(x)
            assert jt.marginal_y() == type_of(y, QUATERNARY)
            rows, cols = jt.counts.sum(axis=1), jt.counts.sum(axis=0)
            mi = mutual_information(jt)
            if np.array_equal(jt.counts * n, np.outer(rows, cols)):
                assert mi == 0.0
            else:
                assert mi > 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_every_joint_type_has_exact_marginals_and_zero_mi_iff_independent(n):
    _check_all_joint_types(n)


@pytest.mark.slow
@pytest.mark.parametrize("n", [5, 6])
def test_every_joint_type_at_longer_lengths(n):
    _check_all_joint_types(n)


def test_entropy_is_concave():
    rng = np.random.default_rng(11)
    for _ in range(200):
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        for lam in np.linspace(0.0, 1.0, 11):
            mixed = entropy(ProbVec(lam * p + (1 - lam) * q))
            assert mixed >= lam * entropy(ProbVec(p)) + (1 - lam) * entropy(ProbVec(q)) - 1e-12


def test_binary_divergence_vanishes_only_on_the_diagonal():
    grid = [k / 20 for k in range(21)]
    for p in grid:
        for q in grid:
            d = binary_divergence(p, q)
            assert d == 0.0 if p == q else d > 0.0


def test_entropy_pair_shrinks_as_the_arguments_spread():
    # h(s + t) + h(s - t) is nonincreasing in t on [0, min(s, 1 - s)]
    for s in np.linspace(0.01, 0.99, 99):
        ts = np.linspace(0.0, min(s, 1 - s), 50)
        values = [binary_entropy(min(s + t, 1.0)) + binary_entropy(max(s - t, 0.0)) for t in ts]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


def test_binary_entropy_at_0_11():
    assert binary_entropy(0.11) == pytest.approx(0.3465153, abs=1e-6)
    assert binary_entropy(0.11) / LOG2 == pytest.approx(0.49992, abs=1e-5)
