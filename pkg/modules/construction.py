"""
Adversarial output sequences for the W_ε / Ŵ_ε family

``y_kappa`` builds the output that is simultaneously the most likely output
of x under W_ε and of x̄ under Ŵ_ε. ``build_y_tilde`` changes one symbol of
it so that the empirical mutual information favours the wrong codeword.
"""

from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

from core.errors import ConstructionError, InputError
from modules.channels import make_w_eps, make_w_hat_eps, product_prob
from modules.probkit import BINARY, QUATERNARY, joint_type, mutual_information, type_counts

KAPPA = {("0", "0"): "a", ("0", "1"): "b", ("1", "0"): "c", ("1", "1"): "d"}
KAPPA_INVERSE = {y: pair for pair, y in KAPPA.items()}

COMPLEMENT = {"0": "1", "1": "0"}


@dataclass(frozen=True)
class ConfusablePair:
    x_m: str
    x_mbar: str
    y_kappa: str
    y_tilde: Optional[str] = None
    modified_index: Optional[int] = None

    def __post_init__(self):
        if self.y_kappa != y_kappa(self.x_m, self.x_mbar):
            raise ConstructionError("y_kappa does not follow the kappa map position by position")
        if self.y_tilde is not None:
            changed = [i for i, (a, b) in enumerate(zip(self.y_kappa, self.y_tilde)) if a != b]
            if len(self.y_tilde) != len(self.y_kappa) or changed != [self.modified_index]:
                raise ConstructionError("y_tilde must differ from y_kappa in exactly the modified position")
            i = self.modified_index
            if (self.y_kappa[i], self.y_tilde[i]) not in (("c", "a"), ("b", "d")):
                raise ConstructionError(f"modification {self.y_kappa[i]}->{self.y_tilde[i]} is neither c->a nor b->d")

    @property
    def n(self) -> int:
        return len(self.x_m)


def kappa(x_bit: str, xbar_bit: str) -> str:
    try:
        return KAPPA[(str(x_bit), str(xbar_bit))]
    except KeyError:
        raise InputError(f"kappa is defined on bits only, got ({x_bit!r}, {xbar_bit!r})") from None


def kappa_inverse(y: str) -> Tuple[str, str]:
    try:
        return KAPPA_INVERSE[y]
    except KeyError:
        raise InputError(f"{y!r} is not a quaternary output symbol") from None


def _check_binary_pair(x_m: Sequence[str], x_mbar: Sequence[str]) -> None:
    if len(x_m) != len(x_mbar):
        raise InputError(f"codeword lengths differ: {len(x_m)} vs {len(x_mbar)}")
    if not set(x_m) <= set(BINARY) or not set(x_mbar) <= set(BINARY):
        raise InputError("codewords must be binary strings")


def y_kappa(x_m: Sequence[str], x_mbar: Sequence[str]) -> str:
    _check_binary_pair(x_m, x_mbar)
    return "".join(KAPPA[pair] for pair in zip(x_m, x_mbar))


def split_y_kappa(y: Sequence[str]) -> Tuple[str, str]:
    """Recover (x_m, x_m̄) from a y_κ output."""
    pairs = [kappa_inverse(s) for s in y]
    return "".join(p[0] for p in pairs), "".join(p[1] for p in pairs)


def is_complement(x: str, other: str) -> bool:
    return len(x) == len(other) and all(COMPLEMENT[a] == b for a, b in zip(x, other))


def _same_type(x_m: str, x_mbar: str) -> None:
    if type_counts(x_m, BINARY) != type_counts(x_mbar, BINARY):
        raise ConstructionError(f"{x_m} and {x_mbar} have different types")


def mmi_tie_check(x_m: str, x_mbar: str) -> Tuple[float, float]:
    """Empirical MI of each codeword with y_κ(x_m, x_m̄); both equal H(P̂_{x_m})."""
    _check_binary_pair(x_m, x_mbar)
    _same_type(x_m, x_mbar)
    y = y_kappa(x_m, x_mbar)
    return (
        mutual_information(joint_type(x_m, y, BINARY, QUATERNARY)),
        mutual_information(joint_type(x_mbar, y, BINARY, QUATERNARY)),
    )


def build_y_tilde(x_m: str, x_mbar: str) -> ConfusablePair:
    _check_binary_pair(x_m, x_mbar)
    _same_type(x_m, x_mbar)
    if x_m == x_mbar:
        raise ConstructionError("identical codewords admit no single-symbol modification")
    if is_complement(x_m, x_mbar):
        raise ConstructionError(f"{x_m} and {x_mbar} are complements; pick a different competitor")

    pairs = list(zip(x_m, x_mbar))
    if ("0", "0") in pairs:
        index, replacement = pairs.index(("1", "0")), "a"
    else:
        # (1, 1) occurs because the pair is neither equal nor complementary
        index, replacement = pairs.index(("0", "1")), "d"

    y = y_kappa(x_m, x_mbar)
    tilde = y[:index] + replacement + y[index + 1 :]
    return ConfusablePair(x_m, x_mbar, y, tilde, index)


def pair_mutual_informations(pair: ConfusablePair) -> Tuple[float, float]:
    """(I(P̂_{x_m ỹ}), I(P̂_{x_m̄ ỹ}))."""
    if pair.y_tilde is None:
        raise ConstructionError("the pair carries no modified sequence")
    return (
        mutual_information(joint_type(pair.x_m, pair.y_tilde, BINARY, QUATERNARY)),
        mutual_information(joint_type(pair.x_mbar, pair.y_tilde, BINARY, QUATERNARY)),
    )


def confusable_prob(
    eps: float,
    pair: ConfusablePair,
    which: Literal["y_kappa", "y_tilde"] = "y_kappa",
    under: Literal["W", "W_hat"] = "W",
    sent: Literal["m", "mbar"] = "m",
) -> float:
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps out of range: {eps} is not in (0, 1)")
    if which == "y_tilde" and pair.y_tilde is None:
        raise ConstructionError("y_tilde requested but the pair has none")
    y = pair.y_tilde if which == "y_tilde" else pair.y_kappa
    ch = make_w_eps(eps) if under == "W" else make_w_hat_eps(eps)
    x = pair.x_m if sent == "m" else pair.x_mbar
    return product_prob(ch, x, y)


def partner_index(codewords: Sequence[str], m: int) -> int:
    """First competitor of codeword ``m`` with the same type that is neither equal nor complementary."""
    x = codewords[m]
    key = type_counts(x, BINARY)
    for k, other in enumerate(codewords):
        if k != m and other != x and not is_complement(x, other) and type_counts(other, BINARY) == key:
            return k
    raise ConstructionError(
        f"codeword {m + 1} has no same-type competitor that is not its complement (needs M >= 3 distinct codewords)"
    )
