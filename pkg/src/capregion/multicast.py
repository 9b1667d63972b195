"""Two-phase multicast: route over a virtual star, then run uniform unicast.

Feasible multicast traffic routes through a capacitated star graph (every
node linked both ways to a virtual center with unit capacity). Each phase
is uniformized to the all-pairs matrix with entries 1/(n-1), which is a
convex combination of the n-1 cyclic shifts; time sharing the two phases
halves the rate, giving the multiple 2^(-1-alpha/2) of the load region.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .birkhoff import ScheduleDecomposition, pair_rate
from .errors import InfeasibleTrafficError
from .network import NodePlacement
from .traffic import MulticastTraffic, membership_mc, UnicastTraffic

_LOAD_TOL = 1e-9


@dataclass(frozen=True)
class StarGraph:
    """Directed star over n network nodes plus a virtual center (index n).

    Every node has one uplink edge to the center and one downlink edge from
    it; all 2n edges have capacity 1.
    """

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("star graph needs at least one leaf node")

    @property
    def center(self) -> int:
        return self.n

    @property
    def edges(self) -> List[Tuple[int, int]]:
        up = [(u, self.center) for u in range(self.n)]
        down = [(self.center, w) for w in range(self.n)]
        return up + down

    def capacity(self, edge: Tuple[int, int]) -> float:
        u, v = edge
        if (u == self.center) == (v == self.center) or not (
            0 <= min(u, v) and max(u, v) <= self.n
        ):
            raise ValueError("not a star edge")
        return 1.0


@dataclass(frozen=True)
class FlowRecord:
    """One multicast entry's path through the star: up once, down per sink.

    The physical realization splits each message into `parts` equal pieces,
    one per network node; the source's own piece never transits, which is
    why `sinks` excludes it.
    """

    source: int
    sinks: Tuple[int, ...]  # destinations excluding the source itself
    rate: float
    parts: int = 0


@dataclass(frozen=True)
class StarRouting:
    """Edge loads and per-entry flows for a feasible traffic on the star.

    Loads count real traffic only; the uniformization padding added later is
    dummy and equals 1 - load on each edge, so goodput reporting can exclude
    it.
    """

    graph: StarGraph
    uplink_load: np.ndarray
    downlink_load: np.ndarray
    flows: Tuple[FlowRecord, ...]

    def uplink_padding(self) -> np.ndarray:
        return 1.0 - self.uplink_load

    def downlink_padding(self) -> np.ndarray:
        return 1.0 - self.downlink_load


def route_over_star(t: MulticastTraffic) -> StarRouting:
    """Route every entry source -> center -> each sink; feasible iff the
    traffic lies in the per-node load region."""
    report = membership_mc(t)
    if not report.member:
        cut = report.binding_cut
        raise InfeasibleTrafficError(
            f"traffic outside the load region (max multiple {report.rho_hat_star:.6g}; "
            f"binding cut: {cut.kind} node {cut.node})"
        )
    n = t.n
    uplink = np.zeros(n)
    downlink = np.zeros(n)
    flows = []
    for u, dests, rate in t.entries():
        sinks = tuple(w for w in dests if w != u)
        uplink[u] += rate
        for w in sinks:
            downlink[w] += rate
        flows.append(FlowRecord(source=u, sinks=sinks, rate=rate, parts=n))
    if uplink.max(initial=0.0) > 1.0 + _LOAD_TOL or downlink.max(initial=0.0) > 1.0 + _LOAD_TOL:
        raise AssertionError("edge load exceeded capacity despite membership")
    return StarRouting(
        graph=StarGraph(n), uplink_load=uplink, downlink_load=downlink, flows=tuple(flows)
    )


def phase_traffic(r: StarRouting, phase: str) -> UnicastTraffic:
    """Unicast traffic run during one phase: the uniform all-pairs matrix.

    Uplink spreads each message over the whole network in n equal parts (one
    stays home); downlink collects the spread parts at each sink. Both are
    dominated by, and padded up to, entries of exactly 1/(n-1).
    """
    if phase not in ("uplink", "downlink"):
        raise ValueError("phase must be 'uplink' or 'downlink'")
    n = r.graph.n
    if n < 2:
        raise ValueError("phase traffic needs n >= 2")
    m = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(m, 0.0)
    return UnicastTraffic(m)


def uniform_cyclic_decomposition(n: int) -> ScheduleDecomposition:
    """The uniform matrix as the n-1 cyclic shifts, each with weight 1/(n-1).

    Every off-diagonal pair appears in exactly one shift, so the
    reconstruction is exact (no floating-point accumulation).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    base = np.arange(n)
    shifts = [(base + k) % n for k in range(1, n)]
    weights = np.full(n - 1, 1.0 / (n - 1))
    return ScheduleDecomposition(n=n, schedules=shifts, weights=weights)


def multicast_achieved_rates(
    t: MulticastTraffic, p: NodePlacement, alpha: float
) -> float:
    """Largest multiple of the load region the two-phase scheme delivers here.

    Half the time goes to each phase; within a phase the cyclic shifts give
    every ordered pair the fraction 1/(n-1), matching its uniform demand of
    1/(n-1), so the bottleneck is half the worst pair rate. The result is
    always >= 2^(-1-alpha/2).
    """
    if p.n != t.n:
        raise ValueError("placement and traffic disagree on n")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    route_over_star(t)  # raises if infeasible
    d = p.distance_matrix
    off = d[~np.eye(p.n, dtype=bool)]
    worst = float(off.max())
    return 0.5 * pair_rate(worst, alpha)
