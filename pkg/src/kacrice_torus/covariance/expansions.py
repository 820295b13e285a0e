"""Closed-form small-|eta| expansions of sigma~ and Xi^0 along eta = t e_1.

Each catalogue entry maps exponents of t to coefficients built from the
derivatives F_k = f^{(k)}(0). Regions follow the split of a symmetric
matrix around the axis e_1: a = {(1,1)}, b = {(1,j): j > 1},
c = {(i,i): i > 1}, d = {(i,j): 1 < i < j}. A trailing "+"/"-" names the
point (phi or theta) carrying the block.

Derived constants:

    c11 = -(3/4) F2/F1 - (5/12) F3/F2      d11 = c11 + (3/2) F2/F1
    c0  = -(1/4) (F3/F2 + F2/F1)            d0  = c0 + F2 / (2 F1)
    c11_bar = -5 F3 - 3 c11 F2              d11_bar = (5/2) F3 - 3 d11 F2
    c0_bar  = -F3 - c0 F2                   d0_bar  = (1/2) F3 - d0 F2

d11, c11_bar, d11_bar and d0_bar are the forms that match sigma_tilde and
xi_bar evaluated directly at small t. The variants d11 = c11 + F2/(2 F1),
c11_bar = -9 F3 - 3 c11 F2, d11_bar = -3 F2 d11 - (3/2) F3 and
d0_bar = 2 F3 - d0 F2 do not; for the Gaussian in m = 1 they give
d11 = 1/3 and c11_bar = 11 sqrt(pi)/16 where the direct values are -1/6
and 3 sqrt(pi)/16.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

from ..exceptions import UnknownExpansionEntryError
from .radial_weight import RadialProfile

logger = logging.getLogger(__name__)

Derivatives = tuple[float, ...]
Coefficient = Callable[[Derivatives], float]


def c11(f: Derivatives) -> float:
    return -0.75 * f[2] / f[1] - (5.0 / 12.0) * f[3] / f[2]


def d11(f: Derivatives) -> float:
    return c11(f) + 1.5 * f[2] / f[1]


def c0(f: Derivatives) -> float:
    return -0.25 * (f[3] / f[2] + f[2] / f[1])


def d0(f: Derivatives) -> float:
    return c0(f) + f[2] / (2.0 * f[1])


def c11_bar(f: Derivatives) -> float:
    return -5.0 * f[3] - 3.0 * c11(f) * f[2]


def d11_bar(f: Derivatives) -> float:
    return 2.5 * f[3] - 3.0 * d11(f) * f[2]


def c0_bar(f: Derivatives) -> float:
    return -f[3] - c0(f) * f[2]


def d0_bar(f: Derivatives) -> float:
    return 0.5 * f[3] - d0(f) * f[2]


@dataclass(frozen=True)
class ExpansionEntry:
    """One catalogued expansion: quantity(t e_1) ~ sum_k terms[k](F) t^k."""

    entry_id: str
    indices: tuple[int, ...]  # representative J_m indices of the entry
    terms: dict[int, Coefficient]
    min_m: int
    description: str

    @property
    def leading_order(self) -> int:
        return min(self.terms)


CATALOGUE: dict[str, ExpansionEntry] = {
    entry.entry_id: entry
    for entry in (
        ExpansionEntry(
            "sigma:1,1",
            (1, 1),
            {-2: lambda f: 1.0 / (3.0 * f[2]), 0: lambda f: c11(f) / (3.0 * f[2])},
            1,
            "sigma~_{1,1} = (1 + c11 t^2) / (3 F2 t^2) + O(t^2)",
        ),
        ExpansionEntry(
            "sigma:-1,1",
            (-1, 1),
            {-2: lambda f: -1.0 / (3.0 * f[2]), 0: lambda f: -d11(f) / (3.0 * f[2])},
            1,
            "sigma~_{-1,1} = -(1 + d11 t^2) / (3 F2 t^2) + O(t^2)",
        ),
        ExpansionEntry(
            "sigma:i,i",
            (2, 2),
            {-2: lambda f: 1.0 / f[2], 0: lambda f: c0(f) / f[2]},
            2,
            "sigma~_{i,i} = (1 + c0 t^2) / (F2 t^2) + O(t^2), i > 1",
        ),
        ExpansionEntry(
            "sigma:-i,i",
            (-2, 2),
            {-2: lambda f: -1.0 / f[2], 0: lambda f: -d0(f) / f[2]},
            2,
            "sigma~_{-i,i} = -(1 + d0 t^2) / (F2 t^2) + O(t^2), i > 1",
        ),
        ExpansionEntry("a+a+", (1, 1, 1, 1), {2: c11_bar}, 1, "Xi_{1,1|1,1}"),
        ExpansionEntry("a-a+", (-1, -1, 1, 1), {2: d11_bar}, 1, "Xi_{-1,-1|1,1}"),
        ExpansionEntry("b+b+", (1, 2, 1, 2), {2: c0_bar}, 2, "Xi_{1,i|1,i}"),
        ExpansionEntry("b-b+", (-1, -2, 1, 2), {2: d0_bar}, 2, "Xi_{-1,-i|1,i}"),
        ExpansionEntry(
            "a+c+",
            (1, 1, 2, 2),
            {2: lambda f: -(4.0 / 3.0) * f[3] - c11(f) * f[2]},
            2,
            "Xi_{1,1|i,i}",
        ),
        ExpansionEntry(
            "a-c+",
            (-1, -1, 2, 2),
            {2: lambda f: f[3] / 6.0 - d11(f) * f[2]},
            2,
            "Xi_{-1,-1|i,i}",
        ),
        ExpansionEntry(
            "c+c+:diag", (2, 2, 2, 2), {0: lambda f: 8.0 * f[2] / 3.0}, 2, "Xi_{i,i|i,i}"
        ),
        ExpansionEntry(
            "c+c+:off", (2, 2, 3, 3), {0: lambda f: 2.0 * f[2] / 3.0}, 3, "Xi_{i,i|j,j}"
        ),
        ExpansionEntry(
            "c-c+:diag", (-2, -2, 2, 2), {0: lambda f: 8.0 * f[2] / 3.0}, 2, "Xi_{-i,-i|i,i}"
        ),
        ExpansionEntry(
            "c-c+:off", (-2, -2, 3, 3), {0: lambda f: 2.0 * f[2] / 3.0}, 3, "Xi_{-i,-i|j,j}"
        ),
        ExpansionEntry("d+d+", (2, 3, 2, 3), {0: lambda f: f[2]}, 3, "Xi_{i,j|i,j}"),
        ExpansionEntry("d-d+", (-2, -3, 2, 3), {0: lambda f: f[2]}, 3, "Xi_{-i,-j|i,j}"),
    )
}


def catalogue_entry(entry_id: str) -> ExpansionEntry:
    try:
        return CATALOGUE[entry_id]
    except KeyError:
        raise UnknownExpansionEntryError(
            f"Unknown expansion entry '{entry_id}'; known entries: {sorted(CATALOGUE)}"
        ) from None


def appendix_b_expansion(p: RadialProfile, m: int, entry_id: str, order: int | None = None) -> float:
    """Coefficient of t^order in the small-t expansion of ``entry_id``.

    ``order`` defaults to the leading exponent of the entry.
    """
    entry = catalogue_entry(entry_id)
    if m != p.m:
        raise ValueError(f"profile has dimension {p.m}, got m={m}")
    if m < entry.min_m:
        raise ValueError(f"entry '{entry_id}' needs m >= {entry.min_m}, got m={m}")
    if order is None:
        order = entry.leading_order
    if order not in entry.terms:
        raise ValueError(
            f"entry '{entry_id}' has no catalogued t^{order} term (known: {sorted(entry.terms)})"
        )
    value = float(entry.terms[order](p.derivatives_at_zero))
    logger.debug(f"{entry_id} t^{order} coefficient = {value!r}")
    return value
