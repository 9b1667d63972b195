"""Unicast and multicast traffic, per-node load region membership.

The approximate region is cut out by 2n half-spaces: total traffic out of
every node <= 1 and total traffic into every node <= 1. Membership and the
maximal feasible multiple are exact arithmetic on row/column loads, so they
never depend on node positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "UnicastTraffic",
    "MulticastTraffic",
    "BindingCut",
    "RegionMembership",
    "unicast_loads",
    "membership_uc",
    "membership_mc",
    "random_sd_pairing",
    "permute_traffic",
    "as_multicast",
]


class UnicastTraffic:
    """Nonnegative n x n rate matrix with zero diagonal.

    Stored as (row, col, rate) triples plus a lazily materialized dense
    matrix, so per-node loads stay O(#entries) even when n is large.
    Self-traffic is forced to zero: diagonal entries of a dense input are
    ignored, duplicate triples are merged by summing.
    """

    def __init__(self, matrix: np.ndarray):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("traffic matrix must be square")
        if m.shape[0] < 1:
            raise ValueError("traffic matrix must be nonempty")
        if not np.isfinite(m).all():
            raise ValueError("rates must be finite")
        np.fill_diagonal(m, 0.0)
        if (m < 0).any():
            raise ValueError("rates must be nonnegative")
        rows, cols = np.nonzero(m)
        self._n = m.shape[0]
        self._rows = rows.astype(np.int64)
        self._cols = cols.astype(np.int64)
        self._rates = m[rows, cols]
        m.setflags(write=False)
        self._matrix: Optional[np.ndarray] = m

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[Tuple[int, int, float]]) -> "UnicastTraffic":
        """Build from sparse (source, destination, rate) triples."""
        if n < 1:
            raise ValueError("n must be positive")
        obj = cls.__new__(cls)
        agg: dict[Tuple[int, int], float] = {}
        for u, w, rate in entries:
            u, w, rate = int(u), int(w), float(rate)
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError(f"entry ({u},{w}) out of range for n={n}")
            if u == w:
                raise ValueError(f"self-traffic entry ({u},{u}) is not allowed")
            if not math.isfinite(rate) or rate < 0:
                raise ValueError("rates must be finite and nonnegative")
            if rate > 0:
                agg[(u, w)] = agg.get((u, w), 0.0) + rate
        obj._n = n
        if agg:
            keys = sorted(agg)
            obj._rows = np.array([k[0] for k in keys], dtype=np.int64)
            obj._cols = np.array([k[1] for k in keys], dtype=np.int64)
            obj._rates = np.array([agg[k] for k in keys], dtype=float)
        else:
            obj._rows = np.empty(0, dtype=np.int64)
            obj._cols = np.empty(0, dtype=np.int64)
            obj._rates = np.empty(0, dtype=float)
        obj._matrix = None
        return obj

    @property
    def n(self) -> int:
        return self._n

    @property
    def matrix(self) -> np.ndarray:
        """Dense n x n view (materialized once, then cached read-only)."""
        if self._matrix is None:
            m = np.zeros((self._n, self._n))
            np.add.at(m, (self._rows, self._cols), self._rates)
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def entries(self) -> Iterable[Tuple[int, int, float]]:
        return zip(self._rows.tolist(), self._cols.tolist(), self._rates.tolist())

    def source_loads(self) -> np.ndarray:
        return np.bincount(self._rows, weights=self._rates, minlength=self._n)

    def destination_loads(self) -> np.ndarray:
        return np.bincount(self._cols, weights=self._rates, minlength=self._n)

    def total(self) -> float:
        return float(self._rates.sum())

    def scaled(self, c: float) -> "UnicastTraffic":
        if c < 0:
            raise ValueError("scale must be nonnegative")
        return UnicastTraffic.from_entries(
            self._n, [(u, w, c * r) for u, w, r in self.entries()]
        )


class MulticastTraffic:
    """Sparse map from (source, destination set) to a nonnegative rate.

    Destination sets are canonicalized as sorted tuples; duplicate keys are
    merged by summing. Entries whose destination set contains nobody but the
    source itself are rejected: no per-node load constraint would see them,
    so accepting them would create unschedulable ghost traffic.
    """

    def __init__(self, n: int, entries: Iterable[Tuple[int, Iterable[int], float]]):
        if n < 1:
            raise ValueError("n must be positive")
        self._n = n
        agg: dict[Tuple[int, Tuple[int, ...]], float] = {}
        for u, group, rate in entries:
            u, rate = int(u), float(rate)
            if not (0 <= u < n):
                raise ValueError(f"source {u} out of range for n={n}")
            dests = tuple(sorted({int(w) for w in group}))
            if not dests:
                raise ValueError("destination set must be nonempty")
            if any(not (0 <= w < n) for w in dests):
                raise ValueError(f"destination out of range for n={n}")
            if dests == (u,):
                raise ValueError(
                    f"entry ({u}, {{{u}}}) has no destination besides its source"
                )
            if not math.isfinite(rate) or rate < 0:
                raise ValueError("rates must be finite and nonnegative")
            if rate > 0:
                agg[(u, dests)] = agg.get((u, dests), 0.0) + rate
        self._entries = dict(sorted(agg.items()))

    @property
    def n(self) -> int:
        return self._n

    def entries(self) -> Iterable[Tuple[int, Tuple[int, ...], float]]:
        for (u, dests), rate in self._entries.items():
            yield u, dests, rate

    def __len__(self) -> int:
        return len(self._entries)

    def source_loads(self) -> np.ndarray:
        loads = np.zeros(self._n)
        for (u, _), rate in self._entries.items():
            loads[u] += rate
        return loads

    def destination_loads(self) -> np.ndarray:
        loads = np.zeros(self._n)
        for (u, dests), rate in self._entries.items():
            for w in dests:
                if w != u:
                    loads[w] += rate
        return loads

    def scaled(self, c: float) -> "MulticastTraffic":
        if c < 0:
            raise ValueError("scale must be nonnegative")
        return MulticastTraffic(
            self._n, [(u, dests, c * r) for u, dests, r in self.entries()]
        )


@dataclass(frozen=True)
class BindingCut:
    """The single-node cut attaining the maximum load."""

    kind: str  # "source" or "destination"
    node: int


@dataclass(frozen=True)
class RegionMembership:
    member: bool
    rho_hat_star: float
    binding_cut: Optional[BindingCut]

    def __post_init__(self):
        if self.rho_hat_star < 0:
            raise ValueError("rho_hat_star must be nonnegative")
        if self.member != (self.rho_hat_star >= 1.0):
            raise ValueError("member must hold exactly when rho_hat_star >= 1")


def unicast_loads(t: UnicastTraffic) -> Tuple[np.ndarray, np.ndarray]:
    """Per-source and per-destination totals (the 2n cut loads)."""
    return t.source_loads(), t.destination_loads()


def _membership(source_loads: np.ndarray, dest_loads: np.ndarray) -> RegionMembership:
    max_src = float(source_loads.max(initial=0.0))
    max_dst = float(dest_loads.max(initial=0.0))
    peak = max(max_src, max_dst)
    if peak == 0.0:
        # Zero traffic scales indefinitely; report the +inf sentinel.
        return RegionMembership(member=True, rho_hat_star=math.inf, binding_cut=None)
    # Ties: source cut before destination cut, lowest node index first.
    if max_src >= max_dst:
        cut = BindingCut("source", int(np.argmax(source_loads)))
    else:
        cut = BindingCut("destination", int(np.argmax(dest_loads)))
    rho = 1.0 / peak
    return RegionMembership(member=rho >= 1.0, rho_hat_star=rho, binding_cut=cut)


def membership_uc(t: UnicastTraffic) -> RegionMembership:
    """Membership in the unicast load region and the maximal multiple."""
    return _membership(*unicast_loads(t))


def membership_mc(t: MulticastTraffic) -> RegionMembership:
    """Membership in the multicast load region and the maximal multiple."""
    return _membership(t.source_loads(), t.destination_loads())


def random_sd_pairing(n: int, seed: int) -> UnicastTraffic:
    """Each node sources one unit-rate message to a uniformly random other node."""
    if n < 2:
        raise ValueError("need n >= 2")
    from .network import _rng

    rng = _rng(seed)
    offsets = rng.integers(1, n, size=n)
    dests = (np.arange(n) + offsets) % n
    return UnicastTraffic.from_entries(n, [(u, int(dests[u]), 1.0) for u in range(n)])


def _check_permutation(pi: Sequence[int], n: int) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.int64)
    if pi.shape != (n,) or not np.array_equal(np.sort(pi), np.arange(n)):
        raise ValueError("pi must be a permutation of 0..n-1")
    return pi


def permute_traffic(t, pi: Sequence[int]):
    """Relabel nodes: the new entry at u takes the old entry at pi(u).

    Works for both traffic kinds and leaves every load multiset (hence
    membership and the maximal multiple) unchanged.
    """
    if isinstance(t, UnicastTraffic):
        pi = _check_permutation(pi, t.n)
        inv = np.empty_like(pi)
        inv[pi] = np.arange(t.n)
        return UnicastTraffic.from_entries(
            t.n, [(int(inv[u]), int(inv[w]), r) for u, w, r in t.entries()]
        )
    if isinstance(t, MulticastTraffic):
        pi = _check_permutation(pi, t.n)
        inv = np.empty_like(pi)
        inv[pi] = np.arange(t.n)
        return MulticastTraffic(
            t.n,
            [
                (int(inv[u]), tuple(int(inv[w]) for w in dests), r)
                for u, dests, r in t.entries()
            ],
        )
    raise TypeError("expected UnicastTraffic or MulticastTraffic")


def as_multicast(t: UnicastTraffic) -> MulticastTraffic:
    """View unicast traffic as multicast with singleton destination sets."""
    return MulticastTraffic(t.n, [(u, (w,), r) for u, w, r in t.entries()])
