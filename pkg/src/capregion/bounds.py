"""Inner/outer scaling factors, single-node cut values, and rate witnesses.

All rates are in bits per channel use (logs base 2). Natural logs appear
only inside the random-pairing rate formula, which is stated that way.
The factor formulas are only valid for n >= 9 and alpha >= 2; violating
those hypotheses raises instead of silently extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional, Tuple

import numpy as np

from .errors import HypothesisError
from .network import RMIN_UPPER, NodePlacement

# Reference grid for the random-pairing rate table printed by the CLI.
TABLE_SIZES = (100, 1_000, 10_000, 100_000)


@dataclass(frozen=True)
class BoundsReport:
    """Sandwich factors plus the feasible-multiple interval for one traffic."""

    inner_factor: float
    outer_factor: float
    rho_hat_star: float
    rho_interval: Tuple[float, float]
    gap_ratio: float
    cutset_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (0.0 < self.inner_factor <= self.outer_factor):
            raise ValueError("need 0 < inner_factor <= outer_factor")
        if self.rho_interval[0] > self.rho_interval[1]:
            raise ValueError("rho_interval must be nonempty")


def _check_factor_args(n: int, alpha: float, rmin: float) -> None:
    if n < 9:
        raise HypothesisError(f"factors require n >= 9 (got n={n})")
    if alpha < 2:
        raise HypothesisError(f"factors require alpha >= 2 (got alpha={alpha})")
    if not (0.0 < rmin <= RMIN_UPPER):
        raise HypothesisError(
            f"normalized separation must lie in (0, 4/sqrt(pi)] (got {rmin})"
        )


def outer_factor(n: int, alpha: float, rmin: float) -> float:
    """log2(n^(2+alpha/2) * rmin^(-alpha)), the single-node cut ceiling."""
    _check_factor_args(n, alpha, rmin)
    return (2.0 + alpha / 2.0) * math.log2(n) - alpha * math.log2(rmin)


def unicast_factors(n: int, alpha: float, rmin: float) -> Tuple[float, float]:
    """(inner, outer) multiples sandwiching the unicast capacity region."""
    _check_factor_args(n, alpha, rmin)
    return 2.0 ** (-alpha / 2.0), outer_factor(n, alpha, rmin)


def multicast_factors(n: int, alpha: float, rmin: float) -> Tuple[float, float]:
    """(inner, outer) multiples for multicast; inner is half the unicast one."""
    _check_factor_args(n, alpha, rmin)
    return 2.0 ** (-1.0 - alpha / 2.0), outer_factor(n, alpha, rmin)


def cutset_single_node(p: NodePlacement, alpha: float, w: int, direction: str = "into") -> float:
    """MIMO-relaxed cut value log2(1 + (n-1) * sum_u r_{u,w}^(-alpha)).

    The cut isolates node w; relaxing per-node powers to a sum power of n-1
    gives the same expression whether traffic flows into or out of w.
    """
    if alpha < 2:
        raise HypothesisError(f"cut values require alpha >= 2 (got {alpha})")
    if direction not in ("into", "out_of"):
        raise ValueError("direction must be 'into' or 'out_of'")
    n = p.n
    if not (0 <= w < n):
        raise IndexError(f"node index {w} out of range for n={n}")
    d = p.distance_matrix[w]
    others = np.delete(d, w)
    gain_sum = float((others ** (-alpha)).sum())
    return math.log2(1.0 + (n - 1) * gain_sum)


def table1_rho_ia(n: int, alpha: float) -> float:
    """Guaranteed per-pair rate 2^(-1-alpha/2) * lnln(n)/ln(n) for random pairing."""
    if n < 16:
        raise HypothesisError(f"random-pairing rate needs n >= 16 (got n={n})")
    if alpha < 2:
        raise HypothesisError(f"requires alpha >= 2 (got alpha={alpha})")
    return 2.0 ** (-1.0 - alpha / 2.0) * math.log(math.log(n)) / math.log(n)


def round_to_table_precision(x: float) -> str:
    """Round a rate to the three-decimal precision used in the printed table.

    Matches the table's double rounding: four decimals first, then half-up
    to three (0.04145 -> 0.0415 -> "0.042").
    """
    four = Decimal(repr(round(float(x), 4)))
    return str(four.quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def table1_row(alpha: float = 4.0) -> Tuple[Tuple[int, ...], Tuple[float, ...], Tuple[str, ...]]:
    """(sizes, full-precision rates, display-rounded rates) for the CLI table."""
    rates = tuple(table1_rho_ia(n, alpha) for n in TABLE_SIZES)
    return TABLE_SIZES, rates, tuple(round_to_table_precision(r) for r in rates)


@dataclass(frozen=True)
class MacWitness:
    """Single-sink witness that the outer bound is loose by at most a constant.

    Concentrating unit total traffic on one destination and decoding it as a
    multiple access channel achieves the multiple (1/2) log2(n), while the
    outer bound at that traffic is (2 + alpha(1/2 + kappa)) log2(n); their
    ratio is bounded below by the constant K = 1/(4 + alpha(1 + 2 kappa)).
    """

    achievable_multiple: float
    outer_multiple: float
    K: float
    mac_equal_rate: float


def mac_tightness_witness(n: int, alpha: float, kappa: float = 0.0) -> MacWitness:
    """Evaluate the single-destination MAC witness; requires n > 2^alpha."""
    if alpha < 2:
        raise HypothesisError(f"requires alpha >= 2 (got alpha={alpha})")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if n <= 2**alpha:
        raise HypothesisError(f"witness requires n > 2^alpha (got n={n}, alpha={alpha})")
    # Every sender backs off so its received power at the sink is 2^(-alpha/2);
    # the symmetric MAC equal-rate point then has maximal sum rate.
    equal_rate = math.log2(1.0 + (n - 1) * 2.0 ** (-alpha / 2.0)) / (n - 1)
    floor = (1.0 - alpha / (2.0 * math.log2(n))) * math.log2(n) / (n - 1)
    if equal_rate < floor:
        raise AssertionError("MAC equal rate fell below its analytic floor")
    return MacWitness(
        achievable_multiple=0.5 * math.log2(n),
        outer_multiple=(2.0 + alpha * (0.5 + kappa)) * math.log2(n),
        K=1.0 / (4.0 + alpha * (1.0 + 2.0 * kappa)),
        mac_equal_rate=equal_rate,
    )


def bounds_report(
    p: NodePlacement,
    alpha: float,
    rho_hat_star: float,
    kind: str = "uc",
) -> BoundsReport:
    """Assemble the sandwich report for a traffic with known maximal multiple."""
    from .network import r_min

    rmin = r_min(p)
    if kind == "uc":
        inner, outer = unicast_factors(p.n, alpha, rmin)
    elif kind == "mc":
        inner, outer = multicast_factors(p.n, alpha, rmin)
    else:
        raise ValueError("kind must be 'uc' or 'mc'")
    cuts = np.array([cutset_single_node(p, alpha, w) for w in range(p.n)])
    return BoundsReport(
        inner_factor=inner,
        outer_factor=outer,
        rho_hat_star=rho_hat_star,
        rho_interval=(inner * rho_hat_star, outer * rho_hat_star),
        gap_ratio=outer / inner,
        cutset_values=cuts,
    )
