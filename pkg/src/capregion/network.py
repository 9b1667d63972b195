"""Node placements on the unit square, distance geometry, channel sampling.

Distances are dimensionless (the network area is fixed to 1). All values are
immutable after construction; channel sampling is keyed by (seed, slot) so
independent slots can be drawn in any order with identical results.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

# Packing bound on the normalized minimum separation of any placement.
RMIN_UPPER = 4.0 / math.sqrt(math.pi)

# Full distance matrices are cached only up to this size; above it the
# O(n^2) memory is not worth it and distances are recomputed on demand.
_DENSE_DISTANCE_LIMIT = 2048


class Fading(enum.Enum):
    PHASE = "phase"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class NodePlacement:
    """n >= 2 pairwise-distinct points in [0,1]^2."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError("nodes must be an (n, 2) array")
        if nodes.shape[0] < 2:
            raise ValueError("a placement needs at least 2 nodes")
        if not np.isfinite(nodes).all():
            raise ValueError("node coordinates must be finite")
        if nodes.min() < 0.0 or nodes.max() > 1.0:
            raise ValueError("node coordinates must lie in [0,1]^2")
        nodes = nodes.copy()
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        if self.min_distance <= 0.0:
            raise ValueError("coincident nodes are not allowed")

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @cached_property
    def min_distance(self) -> float:
        """Smallest pairwise distance, via a KD-tree (O(n log n))."""
        dists, _ = cKDTree(self.nodes).query(self.nodes, k=2)
        return float(dists[:, 1].min())

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """Symmetric pairwise distance matrix (cached for moderate n)."""
        if self.n > _DENSE_DISTANCE_LIMIT:
            raise ValueError(
                f"distance matrix not materialized for n > {_DENSE_DISTANCE_LIMIT}; "
                "use pairwise_distance for single pairs"
            )
        diff = self.nodes[:, None, :] - self.nodes[None, :, :]
        d = np.sqrt((diff**2).sum(axis=2))
        d.setflags(write=False)
        return d


@dataclass(frozen=True)
class ChannelParams:
    """Path-loss exponent alpha >= 2 and the fading law."""

    alpha: float
    fading: Fading = Fading.PHASE

    def __post_init__(self):
        if self.alpha < 2:
            raise ValueError("path-loss exponent must satisfy alpha >= 2")


def pairwise_distance(p: NodePlacement, u: int, v: int) -> float:
    """Euclidean distance between two distinct nodes."""
    n = p.n
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"node index out of range for n={n}")
    if u == v:
        raise ValueError("self-distance is undefined (u == v)")
    return float(np.hypot(*(p.nodes[u] - p.nodes[v])))


def r_min(p: NodePlacement) -> float:
    """Normalized minimum node separation: sqrt(n) * min pairwise distance."""
    return math.sqrt(p.n) * p.min_distance


def grid_placement(n: int) -> NodePlacement:
    """Cell-centered sqrt(n) x sqrt(n) grid with spacing n^(-1/2).

    The cell-centered convention makes the minimum distance exactly n^(-1/2)
    and hence the normalized separation exactly 1; a corner-anchored grid
    with spacing 1/(sqrt(n)-1) would not.
    """
    if n < 4:
        raise ValueError("grid placement needs n >= 4")
    k = math.isqrt(n)
    if k * k != n:
        raise ValueError(f"n={n} is not a perfect square")
    coords = (np.arange(k) + 0.5) / k
    xx, yy = np.meshgrid(coords, coords)
    return NodePlacement(np.column_stack([xx.ravel(), yy.ravel()]))


def uniform_random_placement(n: int, seed: int) -> NodePlacement:
    """n i.i.d. uniform points on the unit square, deterministic given seed."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = _rng(seed)
    return NodePlacement(rng.random((n, 2)))


def sample_channel(p: NodePlacement, c: ChannelParams, seed: int, t: int) -> np.ndarray:
    """Complex gain matrix for one slot; entry (u, v) is the gain u -> v.

    Phase fading: modulus exactly r^(-alpha/2), phase i.i.d. uniform.
    Rayleigh fading: circularly-symmetric Gaussian with E|h|^2 = r^(-alpha).
    Diagonal entries are zero (there is no self-channel). Slots are i.i.d.,
    the strongest member of the stationary-ergodic class assumed here.
    """
    n = p.n
    d = p.distance_matrix.copy()
    np.fill_diagonal(d, 1.0)  # placeholder; diagonal zeroed below
    attenuation = d ** (-c.alpha / 2.0)
    rng = _rng(seed, t)
    if c.fading is Fading.PHASE:
        theta = rng.uniform(0.0, 2.0 * math.pi, size=(n, n))
        h = attenuation * np.exp(1j * theta)
    else:
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = attenuation * z / math.sqrt(2.0)
    np.fill_diagonal(h, 0.0)
    return h


def _rng(seed: int, *key: int) -> np.random.Generator:
    """Generator keyed by (seed, key...) so substreams are independent."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and stream keys must be nonnegative")
    return np.random.default_rng(
        np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key)))
    )
