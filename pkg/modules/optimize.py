import math
from dataclasses import dataclass
from typing import Callable

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


@dataclass(frozen=True)
class LineSearchResult:
    argmax: float
    value: float
    at_upper_bound: bool = False


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> LineSearchResult:
    """
    Golden-section search for the maximum of a unimodal ``f`` on [a, b].

    The bracket shrinks until it is narrower than ``tol``. Both end points are
    compared against the interior estimate, so a maximum sitting on the
    boundary is returned exactly; ``at_upper_bound`` reports that the
    objective was still increasing at ``b``.
    """
    a, b = min(a, b), max(a, b)
    fa, fb = f(a), f(b)
    h = b - a
    if h <= tol:
        return LineSearchResult(b, fb, True) if fb >= fa else LineSearchResult(a, fa)

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    lo, hi = a, b
    c = lo + INV_PHI_SQUARE * h
    d = lo + INV_PHI * h
    yc, yd = f(c), f(d)

    for _ in range(steps):
        if yc > yd:
            hi = d
            d, yd = c, yc
            h = INV_PHI * h
            c = lo + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            lo = c
            c, yc = d, yd
            h = INV_PHI * h
            d = lo + INV_PHI * h
            yd = f(d)

    x, fx = (c, yc) if yc > yd else (d, yd)
    if fb >= fx:
        return LineSearchResult(b, fb, True)
    if fa >= fx:
        return LineSearchResult(a, fa)
    return LineSearchResult(x, fx)
