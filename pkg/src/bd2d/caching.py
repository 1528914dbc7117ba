"""Segment sizing, per-node cache budgets and cache placement policies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .popularity import ZipfModel, sample_ranks

__all__ = [
    "MAX_SEGMENT_S",
    "SegmentSpec",
    "CacheBudget",
    "CachePlacement",
    "segment_size",
    "capacity_in_segments",
    "place_random",
    "place_mpco",
    "place_complete_file",
]

# average length of a popular short-form video; an initial segment never exceeds it
MAX_SEGMENT_S = 240.0


def segment_size(duration_s: float, bitrate_mbps: float) -> float:
    """Size in megabits of a CBR segment lasting ``duration_s`` seconds."""
    if not (duration_s > 0 and bitrate_mbps > 0):
        raise ValueError("segment duration and bitrate must be positive")
    return duration_s * bitrate_mbps


def capacity_in_segments(capacity_s: float, duration_s: float) -> int:
    """How many whole segments of ``duration_s`` fit in ``capacity_s``."""
    if not duration_s > 0:
        raise ValueError("segment duration must be positive")
    if capacity_s < duration_s:
        raise ValueError(
            f"cache capacity {capacity_s}s cannot hold one {duration_s}s segment")
    return int(math.floor(capacity_s / duration_s))


@dataclass(frozen=True)
class SegmentSpec:
    duration_s: float
    bitrate_mbps: float

    def __post_init__(self):
        if self.duration_s > MAX_SEGMENT_S:
            raise ValueError(f"segment duration exceeds {MAX_SEGMENT_S}s")
        segment_size(self.duration_s, self.bitrate_mbps)

    @property
    def size_mb(self) -> float:
        return segment_size(self.duration_s, self.bitrate_mbps)


@dataclass(frozen=True)
class CacheBudget:
    """Cache capacity counted in seconds of CBR video."""

    capacity_s: float = 240.0
    segment_s: float = 60.0

    @property
    def segments_per_node(self) -> int:
        return capacity_in_segments(self.capacity_s, self.segment_s)


@dataclass(frozen=True)
class CachePlacement:
    """Cached ranks per node: row ``i`` holds node ``i``'s sorted, distinct ranks."""

    ranks: np.ndarray = field(repr=False)
    catalog_size: int

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.int64)
        if ranks.ndim != 2:
            raise ValueError("ranks must be a 2-D (nodes x slots) array")
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def n_nodes(self) -> int:
        return self.ranks.shape[0]

    @property
    def per_node(self) -> int:
        return self.ranks.shape[1]

    def frequencies(self) -> np.ndarray:
        """Fraction of nodes caching each rank; index 0 is rank 1."""
        q = np.zeros(self.catalog_size)
        if self.n_nodes == 0:
            return q
        counts = np.bincount(self.ranks.ravel() - 1, minlength=self.catalog_size)
        return counts / self.n_nodes

    def distinct_ranks(self) -> int:
        return int(np.unique(self.ranks).size)

    def contains(self, node: int, rank: int) -> bool:
        return bool(np.any(self.ranks[node] == rank))


def _check_k(k, catalog_size):
    if not 1 <= k <= catalog_size:
        raise ValueError(f"segments per node must be in 1..{catalog_size}, got {k}")


def place_random(n: int, popularity: ZipfModel, k: int,
                 rng: np.random.Generator) -> CachePlacement:
    """Popularity-weighted random caching of ``k`` distinct ranks per node.

    Each node's set is distributed as ``k`` successive draws without
    replacement, renormalising after each draw. Sampling uses exponential
    keys (``log(u) / p``, keep the ``k`` largest), which gives that law in
    one vectorised pass. Keys are drawn for the whole catalog, so with a
    fixed generator state the set for ``k`` is contained in the set for any
    larger ``k``.
    """
    L = popularity.catalog_size
    _check_k(k, L)
    if n == 0:
        return CachePlacement(np.empty((0, k), dtype=np.int64), L)
    u = 1.0 - rng.random((n, L))  # (0, 1]
    keys = np.log(u) / popularity.pmf
    if k == L:
        top = np.broadcast_to(np.arange(L), (n, L))
    else:
        top = np.argpartition(-keys, k - 1, axis=1)[:, :k]
    return CachePlacement(np.sort(top, axis=1) + 1, L)


def place_mpco(n: int, k: int, catalog_size: int | None = None) -> CachePlacement:
    """Most-popular caching only: every node holds ranks ``1..k``."""
    L = k if catalog_size is None else catalog_size
    _check_k(k, L)
    ranks = np.tile(np.arange(1, k + 1, dtype=np.int64), (n, 1))
    return CachePlacement(ranks.reshape(n, k), L)


def place_complete_file(n: int, popularity: ZipfModel, rng: np.random.Generator,
                        draw: str = "popularity") -> CachePlacement:
    """One whole file per node, drawn by popularity (default) or uniformly."""
    L = popularity.catalog_size
    if draw == "popularity":
        ranks = sample_ranks(popularity, n, rng)
    elif draw == "uniform":
        ranks = rng.integers(1, L + 1, size=n)
    else:
        raise ValueError(f"unknown complete-file draw {draw!r}")
    return CachePlacement(ranks.reshape(n, 1), L)
