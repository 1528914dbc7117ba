"""DBSCAN over a node population and epsilon-sweep statistics."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .spatial import NeighborIndex, PointSet, build_index

NOISE = -1

__all__ = [
    "NOISE",
    "Clustering",
    "SweepRow",
    "dbscan",
    "dbscan_reference",
    "same_partition",
    "sweep_epsilon",
]


@dataclass(frozen=True)
class Clustering:
    """Per-node cluster ids ``0..kappa-1`` or :data:`NOISE`."""

    labels: np.ndarray
    kappa: int
    core: np.ndarray | None = None

    @property
    def n_outliers(self) -> int:
        return int(np.count_nonzero(self.labels == NOISE))


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    mean_clusters: float
    mean_outliers: float


def _check_params(epsilon, min_bsn):
    if min_bsn < 2:
        raise ValueError(f"min_bsn must be >= 2, got {min_bsn}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")


def dbscan(points: PointSet, index: NeighborIndex | None, epsilon: float,
           min_bsn: int = 2) -> Clustering:
    """Grid-indexed DBSCAN.

    A node is core when it has at least ``min_bsn`` nodes, itself included,
    within ``epsilon``. Core nodes connected through ``epsilon``-links form
    clusters; cluster ids follow the lowest core index in each cluster.
    A border node joins the lowest-id cluster owning a core neighbour, which
    is what index-order expansion produces.
    """
    _check_params(epsilon, min_bsn)
    if index is None:
        index = build_index(points, epsilon)
    i, j = index.pairs(epsilon)
    return _label_from_pairs(len(points), i, j, min_bsn)


def _label_from_pairs(n, i, j, min_bsn):
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return Clustering(labels, 0, np.zeros(0, dtype=bool))
    degree = np.bincount(i, minlength=n)
    core = degree + 1 >= min_bsn

    cc_mask = core[i] & core[j]
    graph = coo_matrix((np.ones(int(cc_mask.sum()), dtype=np.int8),
                        (i[cc_mask], j[cc_mask])), shape=(n, n))
    _, comp = connected_components(graph, directed=False)

    core_idx = np.nonzero(core)[0]
    comp_core = comp[core_idx]
    # first occurrence in ascending index order gives discovery order
    _, first = np.unique(comp_core, return_index=True)
    discovery = comp_core[np.sort(first)]
    remap = np.full(comp.max() + 1, NOISE, dtype=np.int64)
    remap[discovery] = np.arange(discovery.size)
    labels[core_idx] = remap[comp_core]

    border = ~core[i] & core[j]
    if border.any():
        bi, bl = i[border], labels[j[border]]
        best = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(best, bi, bl)
        claimed = best != np.iinfo(np.int64).max
        labels[claimed] = best[claimed]
    return Clustering(labels, int(discovery.size), core)


def dbscan_reference(points: PointSet, epsilon: float, min_bsn: int = 2) -> Clustering:
    """Textbook DBSCAN with exhaustive O(n^2) neighbourhoods (test oracle)."""
    _check_params(epsilon, min_bsn)
    xy = points.xy
    n = len(xy)
    hood = []
    for a in range(n):
        d2 = np.sum((xy - xy[a]) ** 2, axis=1)
        nb = np.nonzero(d2 <= epsilon * epsilon)[0]
        hood.append([int(b) for b in nb if b != a])
    is_core = [len(h) + 1 >= min_bsn for h in hood]

    unvisited = -2
    labels = [unvisited] * n
    cluster = 0
    for p in range(n):
        if labels[p] != unvisited:
            continue
        if not is_core[p]:
            labels[p] = NOISE
            continue
        labels[p] = cluster
        queue = deque(hood[p])
        while queue:
            q = queue.popleft()
            if labels[q] == NOISE:
                labels[q] = cluster
            if labels[q] != unvisited:
                continue
            labels[q] = cluster
            if is_core[q]:
                queue.extend(hood[q])
        cluster += 1
    return Clustering(np.array(labels, dtype=np.int64), cluster, np.array(is_core, dtype=bool))


def same_partition(a, b) -> bool:
    """True when two label vectors agree up to renaming of cluster ids."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if not np.array_equal(a == NOISE, b == NOISE):
        return False
    m = a != NOISE
    pairs = set(zip(a[m].tolist(), b[m].tolist()))
    return len(pairs) == len({p[0] for p in pairs}) == len({p[1] for p in pairs})


def sweep_epsilon(points_for_replication, eps_list, min_bsn: int, replications: int,
                  per_replication: list | None = None) -> list[SweepRow]:
    """Average cluster and outlier counts per epsilon over fresh placements.

    ``points_for_replication(r)`` returns the :class:`PointSet` for
    replication ``r``. Each placement is clustered at every epsilon, so
    per-replication trends are comparable. When ``per_replication`` is a
    list, ``(epsilon, r, n_clusters, n_outliers)`` tuples are appended to it.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ValueError("eps_list must be non-empty")
    if any(b < a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be ascending")
    clusters = np.zeros((len(eps_list), replications))
    outliers = np.zeros((len(eps_list), replications))
    for r in range(replications):
        ps = points_for_replication(r)
        index = build_index(ps, eps_list[-1])
        for e, eps in enumerate(eps_list):
            cl = dbscan(ps, index, eps, min_bsn)
            clusters[e, r] = cl.kappa
            outliers[e, r] = cl.n_outliers
    if per_replication is not None:
        for e, eps in enumerate(eps_list):
            for r in range(replications):
                per_replication.append((eps, r, int(clusters[e, r]), int(outliers[e, r])))
    return [SweepRow(eps, float(clusters[e].mean()), float(outliers[e].mean()))
            for e, eps in enumerate(eps_list)]
