"""Permutation scheduling: substochastic completion and Birkhoff decomposition.

A doubly substochastic traffic matrix is first padded to a doubly stochastic
one that dominates it entrywise, then peeled into a convex combination of
permutation matrices. Time sharing the permutations, with each scheduled
pair running the aligned-pair rate (1/2) log2(1 + 2 r^(-alpha)), delivers
every entry at no less than 2^(-alpha/2) times its demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import InfeasibleTrafficError
from .network import NodePlacement
from .traffic import UnicastTraffic

# Entries below this are treated as zero while peeling, which guarantees
# termination under floating point.
_ZERO_TOL = 1e-12
_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ScheduleDecomposition:
    """Weighted permutation schedules: sum_i weights[i] * S_i reconstructs
    the decomposed matrix.

    Each schedule is stored as an image array (schedule s maps source u to
    destination s[u]); `residual` is the renormalization slack left over by
    the peeling loop. The number of schedules can never exceed n^2 - 2n + 2:
    every peel zeroes an entry that no later schedule touches, so the
    extracted permutation matrices are linearly independent and their count
    is capped by the dimension of the span of all permutation matrices.
    """

    n: int
    schedules: List[np.ndarray]
    weights: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if len(self.schedules) != len(weights):
            raise ValueError("schedules and weights must have equal length")
        if len(self.schedules) == 0:
            raise ValueError("a decomposition needs at least one schedule")
        if self.n >= 2 and len(self.schedules) > self.n**2 - 2 * self.n + 2:
            raise ValueError("schedule count exceeds n^2 - 2n + 2")
        if (weights < 0).any() or abs(weights.sum() - 1.0) > _SUM_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        ident = np.arange(self.n)
        for s in self.schedules:
            if s.shape != (self.n,) or not np.array_equal(np.sort(s), ident):
                raise ValueError("each schedule must be a permutation of 0..n-1")

    def matrices(self) -> List[np.ndarray]:
        """Schedules as 0/1 permutation matrices."""
        out = []
        for s in self.schedules:
            m = np.zeros((self.n, self.n))
            m[np.arange(self.n), s] = 1.0
            out.append(m)
        return out

    def reconstruct(self) -> np.ndarray:
        """sum_i weights[i] * S_i as a dense matrix."""
        m = np.zeros((self.n, self.n))
        rows = np.arange(self.n)
        for s, w in zip(self.schedules, self.weights):
            m[rows, s] += w
        return m


def complete_to_doubly_stochastic(t: UnicastTraffic) -> np.ndarray:
    """Pad a doubly substochastic matrix up to a dominating doubly stochastic one.

    Greedy: repeatedly add min(row deficit, column deficit) at the
    lexicographically first (deficient row, deficient column) position.
    Each step saturates a row or a column, so it ends within 2n steps.
    """
    m = t.matrix.copy()
    n = t.n
    row_def = 1.0 - m.sum(axis=1)
    col_def = 1.0 - m.sum(axis=0)
    if row_def.min() < -_SUM_TOL or col_def.min() < -_SUM_TOL:
        raise InfeasibleTrafficError(
            "traffic is not doubly substochastic; scale by its maximal multiple first"
        )
    np.clip(row_def, 0.0, None, out=row_def)
    np.clip(col_def, 0.0, None, out=col_def)
    rows = [u for u in range(n) if row_def[u] > 0]
    cols = [w for w in range(n) if col_def[w] > 0]
    while rows and cols:
        u, w = rows[0], cols[0]
        delta = min(row_def[u], col_def[w])
        m[u, w] += delta
        row_def[u] -= delta
        col_def[w] -= delta
        if row_def[u] <= _ZERO_TOL:
            row_def[u] = 0.0
            rows.pop(0)
        if col_def[w] <= _ZERO_TOL:
            col_def[w] = 0.0
            cols.pop(0)
    return m


def birkhoff_decompose(m: np.ndarray) -> ScheduleDecomposition:
    """Peel a doubly stochastic matrix into weighted permutation schedules.

    Each round finds a perfect matching on the positive-support bipartite
    graph (augmenting paths, reusing the previous matching), extracts the
    minimum matched entry as the weight, and subtracts. Weights are
    renormalized to sum exactly 1; the pre-normalization slack is reported
    as `residual`.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if (a < -_ZERO_TOL).any():
        raise ValueError("matrix must be nonnegative")
    if (
        np.abs(a.sum(axis=1) - 1.0).max() > _SUM_TOL
        or np.abs(a.sum(axis=0) - 1.0).max() > _SUM_TOL
    ):
        raise ValueError("matrix is not doubly stochastic (row/col sums off by > 1e-9)")
    np.clip(a, 0.0, None, out=a)
    a[a < _ZERO_TOL] = 0.0

    # Positive support as per-row column sets, maintained incrementally:
    # only entries on the extracted matching can drop to zero.
    support = [set(np.nonzero(a[u])[0].tolist()) for u in range(n)]
    match_row = np.full(n, -1, dtype=np.int64)  # row -> matched column
    match_col = np.full(n, -1, dtype=np.int64)
    schedules: List[np.ndarray] = []
    raw_weights: List[float] = []
    remaining = 1.0
    rows = np.arange(n)
    while remaining > _ZERO_TOL and any(support):
        # Rounding can exhaust one row's support a step before the others;
        # peeling then stops and the reconstruction check below decides.
        if not all(
            match_row[u] >= 0 or _augment(support, u, match_row, match_col)
            for u in range(n)
        ):
            break
        matched = a[rows, match_row]
        weight = float(matched.min())
        schedules.append(match_row.copy())
        raw_weights.append(weight)
        matched -= weight
        small = matched < _ZERO_TOL
        matched[small] = 0.0
        a[rows, match_row] = matched
        remaining -= weight
        for u in np.nonzero(small)[0]:
            support[u].discard(int(match_row[u]))
            match_col[match_row[u]] = -1
            match_row[u] = -1

    if not raw_weights:
        raise ValueError("no permutation could be extracted; matrix support is defective")
    raw = np.asarray(raw_weights)
    residual = float(1.0 - raw.sum())
    out = ScheduleDecomposition(
        n=n, schedules=schedules, weights=raw / raw.sum(), residual=residual
    )
    err = np.abs(out.reconstruct() - np.asarray(m, dtype=float)).max()
    if err >= _SUM_TOL:
        raise ValueError(
            f"decomposition reconstructs the input only to {err:.3g}; "
            "matrix was not doubly stochastic"
        )
    return out


def _augment(support, root: int, match_row: np.ndarray, match_col: np.ndarray) -> bool:
    """Grow the matching by one alternating path from `root` (iterative DFS).

    Each stack frame holds [row, column iterator, column descended through];
    on reaching a free column the whole path is relinked frame by frame.
    """
    seen = set()
    stack = [[root, iter(support[root]), -1]]
    while stack:
        frame = stack[-1]
        u, columns = frame[0], frame[1]
        moved = False
        for w in columns:
            if w in seen:
                continue
            seen.add(w)
            if match_col[w] < 0:
                match_row[u] = w
                match_col[w] = u
                for pu, _, pw in stack[:-1]:
                    match_row[pu] = pw
                    match_col[pw] = pu
                return True
            frame[2] = w
            stack.append([int(match_col[w]), iter(support[int(match_col[w])]), -1])
            moved = True
            break
        if not moved:
            stack.pop()
    return False


def pair_rate(distance: float, alpha: float) -> float:
    """Aligned-pair rate (1/2) log2(1 + 2 r^(-alpha)) in bits per channel use."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return 0.5 * math.log2(1.0 + 2.0 * distance ** (-alpha))


def schedule_rates(
    d: ScheduleDecomposition, p: NodePlacement, alpha: float
) -> UnicastTraffic:
    """Rates delivered by time sharing the schedules on a given placement.

    Pair (u, w) scheduled in S_i runs at pair_rate(r_uw, alpha) for the time
    fraction weights[i]; fixed points of a schedule idle (padded self-traffic
    carries nothing). Every off-diagonal entry of the result is at least
    2^(-alpha/2) times the reconstructed share of that pair.
    """
    if p.n != d.n:
        raise ValueError("placement and decomposition disagree on n")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    dist = p.distance_matrix
    rate = np.zeros((d.n, d.n))
    rows = np.arange(d.n)
    with np.errstate(divide="ignore"):
        per_pair = 0.5 * np.log2(1.0 + 2.0 * np.where(dist > 0, dist, np.inf) ** (-alpha))
    for s, w in zip(d.schedules, d.weights):
        active = rows != s
        rate[rows[active], s[active]] += w * per_pair[rows[active], s[active]]
    return UnicastTraffic(rate)
