"""Rayleigh fading: water-filling cut bound and opportunistic matched pairs.

Outer side: the single-node cut under Rayleigh fading is bounded through a
water-filling power allocation against the aggregate gain, which is a sum
of unit-mean exponentials (Erlang). Inner side: per slot, keep only links
whose gain beats a ln(1/p) threshold with p = 1/sqrt(n), match the surviving
graph, orient each matched pair toward its stronger direction, and run
aligned pairs; the threshold turns the per-pair rate into a log log(n) gain.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from .errors import HypothesisError
from .network import ChannelParams, Fading, NodePlacement, sample_channel

_POWER_TOL = 1e-6

# log2 log2 e, the constant offset in the opportunistic rate.
LOGLOG_E = math.log2(math.log2(math.e))


def erlang_tail(n: int, gamma: float) -> float:
    """P(sum of n-1 unit-mean exponentials >= gamma), exactly:
    exp(-gamma) * sum_{i=0}^{n-2} gamma^i / i!.

    Evaluated in log space so large gamma never underflows term by term.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0.0:
        return 1.0
    i = np.arange(n - 1)
    log_terms = -gamma + i * math.log(gamma) - gammaln(i + 1)
    return float(min(1.0, math.exp(logsumexp(log_terms))))


@dataclass(frozen=True)
class WaterfillSolution:
    """Water level, the power budget it meets, and the resulting cut bound."""

    g0: float
    expected_power: float
    bound_bits: float
    n: int

    def __post_init__(self):
        if self.g0 < 1.0 / (4.0 * (self.n - 1)):
            raise ValueError("water level below its analytic floor 1/(4(n-1))")
        if abs(self.expected_power - (self.n - 1)) > _POWER_TOL:
            raise ValueError("power constraint missed by more than 1e-6")


def power_allocation(g, g0: float, gain_scale: float) -> np.ndarray:
    """Water-filling power (1/g0 - 1/(gain_scale * g))^+; always in [0, 1/g0]."""
    g = np.asarray(g, dtype=float)
    return np.clip(1.0 / g0 - 1.0 / (gain_scale * g), 0.0, None)


def expected_waterfill_power(g0: float, n: int, gain_scale: float) -> float:
    """E[(1/g0 - 1/(gain_scale*g))^+] under the Erlang aggregate gain.

    Adaptive quadrature against the Erlang density, split at the mean so
    the probability mass is never missed; relative tolerance 1e-8.
    """
    lo = g0 / gain_scale  # allocation is zero below this gain
    log_norm = gammaln(n - 1)

    def integrand(g: float) -> float:
        density = math.exp((n - 2) * math.log(g) - g - log_norm)
        return density * (1.0 / g0 - 1.0 / (gain_scale * g))

    mid = max(float(n - 1), 2.0 * lo)
    head, _ = integrate.quad(integrand, lo, mid, epsabs=1e-12, epsrel=1e-8, limit=200)
    tail, _ = integrate.quad(integrand, mid, np.inf, epsabs=1e-12, epsrel=1e-8, limit=200)
    return head + tail


def solve_waterfill(n: int, alpha: float, rmin: float) -> WaterfillSolution:
    """Find the water level meeting the sum-power budget n-1 by bisection.

    The budget E[P(g)] is strictly decreasing in the level and bracketed on
    [1/(8(n-1)), n]. The reported bound is log2(1 + (n-1)*scale/g0), which
    never exceeds log2(4 n^(2+alpha/2) rmin^(-alpha)) for n >= 9.
    """
    if n < 9:
        raise HypothesisError(f"waterfill bound requires n >= 9 (got n={n})")
    if alpha < 2:
        raise HypothesisError(f"requires alpha >= 2 (got alpha={alpha})")
    if rmin <= 0:
        raise ValueError("rmin must be positive")
    scale = n ** (alpha / 2.0) * rmin ** (-alpha)
    target = float(n - 1)
    lo, hi = 1.0 / (8.0 * (n - 1)), float(n)
    if (
        expected_waterfill_power(lo, n, scale) < target
        or expected_waterfill_power(hi, n, scale) > target
    ):
        raise ArithmeticError("bisection bracket failed to straddle the power budget")
    g0, value = lo, None
    for _ in range(200):
        g0 = 0.5 * (lo + hi)
        value = expected_waterfill_power(g0, n, scale)
        if abs(value - target) <= 0.5 * _POWER_TOL:
            break
        if value > target:
            lo = g0
        else:
            hi = g0
    bound = math.log2(1.0 + target * scale / g0)
    return WaterfillSolution(g0=g0, expected_power=value, bound_bits=bound, n=n)


def edge_probability(n: int) -> float:
    """Per-direction keep probability p(n) = 1/sqrt(n)."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 1.0 / math.sqrt(n)


def slot_graph(p: NodePlacement, gains: np.ndarray, alpha: float) -> List[Tuple[int, int]]:
    """Undirected edges (u, v), u < v, whose stronger direction clears the
    gain threshold ln(1/p(n)) * r_{u,v}^(-alpha).

    Since each |h|^2 r^alpha is unit-mean exponential, every edge survives
    with the same distance-independent probability 2p - p^2.
    """
    n = p.n
    if gains.shape != (n, n):
        raise ValueError("gain matrix does not match the placement")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    log_inv_p = math.log(1.0 / edge_probability(n))
    power = np.abs(gains) ** 2
    d = p.distance_matrix.copy()
    np.fill_diagonal(d, 1.0)
    threshold = log_inv_p * d ** (-alpha)
    iu, iv = np.triu_indices(n, k=1)
    keep = np.maximum(power[iu, iv], power[iv, iu]) >= threshold[iu, iv]
    return [(int(u), int(v)) for u, v in zip(iu[keep], iv[keep])]


def max_matching(edges: Sequence[Tuple[int, int]], n: int) -> List[Tuple[int, int]]:
    """Maximum-cardinality matching on a general (non-bipartite) graph."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u},{v}) out of range for n={n}")
        if u != v:
            g.add_edge(u, v)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    return sorted((min(u, v), max(u, v)) for u, v in mate)


@dataclass(frozen=True)
class SlotPlan:
    """One slot of the opportunistic scheme."""

    slot: int
    edges: Tuple[Tuple[int, int], ...]
    matching: Tuple[Tuple[int, int], ...]
    idle: bool
    # Populated only on non-idle slots:
    orientation: Tuple[Tuple[int, int], ...] = ()
    pair_rates: Tuple[float, ...] = ()
    rate_floor: Optional[float] = None

    @property
    def covered(self) -> int:
        return 2 * len(self.matching)


@dataclass(frozen=True)
class OpportunisticPlan:
    """Slot-by-slot plans plus run-level summaries.

    The long-run per-pair rate is reported empirically: matchings are chosen
    deterministically per slot, so the equal-fraction fairness argument is a
    claim about the ensemble, not a guarantee of this schedule.
    """

    n: int
    alpha: float
    slots: Tuple[SlotPlan, ...]

    @property
    def idle_fraction(self) -> float:
        if not self.slots:
            return 0.0
        return sum(s.idle for s in self.slots) / len(self.slots)

    @property
    def mean_coverage(self) -> float:
        if not self.slots:
            return 0.0
        return sum(s.covered for s in self.slots) / len(self.slots)

    def guaranteed_slot_rate(self) -> float:
        """Per-pair rate floor (1/2) log2(1 + 2^(-alpha/2) ln n) on active slots."""
        return guaranteed_slot_rate(self.n, self.alpha)

    def empirical_pair_rate(self) -> float:
        """Mean over ordered pairs of their realized long-run certified rate."""
        if not self.slots:
            return 0.0
        total = 0.0
        for s in self.slots:
            if not s.idle:
                total += sum(s.pair_rates)
        return total / (len(self.slots) * self.n * (self.n - 1))


def guaranteed_slot_rate(n: int, alpha: float) -> float:
    """Certified per-pair rate on any non-idle slot."""
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    return 0.5 * math.log2(1.0 + 2.0 ** (-alpha / 2.0) * math.log(n))


def opportunistic_round(p: NodePlacement, alpha: float, seed: int, t: int) -> SlotPlan:
    """Run one slot: threshold the gains, match, orient, certify rates.

    A slot is idle when the matching covers fewer than n-1 vertices. Each
    matched pair is oriented toward the strictly larger gain magnitude (ties
    broken by letting the lower index transmit) and certified at
    (1/2) log2(1 + 2 |h|^2) for the selected direction.
    """
    n = p.n
    gains = sample_channel(p, ChannelParams(alpha=alpha, fading=Fading.RAYLEIGH), seed, t)
    edges = slot_graph(p, gains, alpha)
    matching = max_matching(edges, n)
    covered = 2 * len(matching)
    if covered < n - 1:
        return SlotPlan(slot=t, edges=tuple(edges), matching=tuple(matching), idle=True)
    orientation = []
    rates = []
    for u, v in matching:
        fwd = abs(gains[u, v]) ** 2
        bwd = abs(gains[v, u]) ** 2
        src, dst, sel = (u, v, fwd) if fwd >= bwd else (v, u, bwd)
        orientation.append((src, dst))
        rates.append(0.5 * math.log2(1.0 + 2.0 * sel))
    return SlotPlan(
        slot=t,
        edges=tuple(edges),
        matching=tuple(matching),
        idle=False,
        orientation=tuple(orientation),
        pair_rates=tuple(rates),
        rate_floor=min(rates),
    )


def run_opportunistic(
    p: NodePlacement, alpha: float, seed: int, slots: int, threads: Optional[int] = None
) -> OpportunisticPlan:
    """Simulate `slots` independent rounds; deterministic for fixed (seed, t).

    Rounds are keyed by slot index, so they may be evaluated in parallel and
    merged in slot order. The worker count is capped by CAPREGION_THREADS
    (default 1).
    """
    if slots < 1:
        raise ValueError("need at least one slot")
    workers = threads if threads is not None else thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            plans = list(pool.map(lambda t: opportunistic_round(p, alpha, seed, t), range(slots)))
    else:
        plans = [opportunistic_round(p, alpha, seed, t) for t in range(slots)]
    return OpportunisticPlan(n=p.n, alpha=alpha, slots=tuple(plans))


def thread_cap() -> int:
    """Worker-thread ceiling from CAPREGION_THREADS (default 1)."""
    raw = os.environ.get("CAPREGION_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"CAPREGION_THREADS must be an integer (got {raw!r})") from exc
    return max(1, cap)


def rayleigh_inner_rate(n: int, alpha: float) -> Tuple[float, float]:
    """(per-pair floor, region multiple) of the opportunistic scheme.

    Per-pair floor (1/(8n)) * (log2 log2 n - alpha/2 - log2 log2 e); the
    region multiple is n/2 times that, i.e. (1/16) * (...). Only defined
    where the leading term wins: log2 log2 n > alpha/2 + log2 log2 e.
    """
    if alpha < 2:
        raise HypothesisError(f"requires alpha >= 2 (got alpha={alpha})")
    if n < 2:
        raise ValueError("need n >= 2")
    margin = math.log2(math.log2(n)) - alpha / 2.0 - LOGLOG_E
    if margin <= 0:
        raise HypothesisError(
            f"opportunistic rate is not positive for n={n}, alpha={alpha}"
        )
    per_pair = margin / (8.0 * n)
    return per_pair, (n / 2.0) * per_pair
