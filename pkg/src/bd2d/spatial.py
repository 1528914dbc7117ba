"""Planar node populations and fixed-radius neighbour search on a uniform grid."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Area",
    "PointSet",
    "NeighborIndex",
    "generate_uniform",
    "generate_ppp",
    "build_index",
    "neighbors_within",
    "neighbors_bruteforce",
]


@dataclass(frozen=True)
class Area:
    """Axis-aligned rectangle ``[0, width] x [0, height]`` in meters."""

    width: float = 1000.0
    height: float = 1000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area dimensions must be positive, got {self.width}x{self.height}")

    @property
    def size(self) -> float:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))


@dataclass(frozen=True)
class PointSet:
    """Node positions as an ``(n, 2)`` float array; row ``i`` is node ``i``."""

    area: Area
    xy: np.ndarray = field(repr=False)

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        if xy.size and (
            xy.min() < 0
            or np.any(xy[:, 0] > self.area.width)
            or np.any(xy[:, 1] > self.area.height)
        ):
            raise ValueError("points must lie inside the area")
        xy.setflags(write=False)
        object.__setattr__(self, "xy", xy)

    def __len__(self) -> int:
        return self.xy.shape[0]


def generate_uniform(n: int, area: Area, rng: np.random.Generator) -> PointSet:
    """Place exactly ``n`` nodes independently and uniformly over ``area``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    xy = rng.random((n, 2)) * (area.width, area.height)
    return PointSet(area, xy)


def generate_ppp(density: float, area: Area, rng: np.random.Generator) -> PointSet:
    """Homogeneous Poisson point process with ``density`` nodes per square meter."""
    if density < 0:
        raise ValueError("density must be non-negative")
    n = int(rng.poisson(density * area.size))
    return generate_uniform(n, area, rng)


class NeighborIndex:
    """Uniform grid over a :class:`PointSet` with cell edge equal to ``radius``.

    Any query of radius ``<= radius`` only needs the 3x3 block of cells
    around the query point.
    """

    def __init__(self, points: PointSet, radius: float):
        if not radius > 0:
            raise ValueError(f"index radius must be positive, got {radius}")
        self.points = points
        self.radius = float(radius)
        area = points.area
        self.nx = max(1, int(np.ceil(area.width / radius)))
        self.ny = max(1, int(np.ceil(area.height / radius)))

        cx, cy = self._cell_of(points.xy)
        cell = cx * self.ny + cy
        self._order = np.argsort(cell, kind="stable")
        counts = np.bincount(cell, minlength=self.nx * self.ny)
        self._start = np.concatenate(([0], np.cumsum(counts)))
        self._cell = cell

    def _cell_of(self, xy):
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        cx = np.clip((xy[:, 0] // self.radius).astype(np.int64), 0, self.nx - 1)
        cy = np.clip((xy[:, 1] // self.radius).astype(np.int64), 0, self.ny - 1)
        return cx, cy

    def cell_members(self, cx: int, cy: int) -> np.ndarray:
        """Node indices stored in cell ``(cx, cy)``; empty outside the grid."""
        if not (0 <= cx < self.nx and 0 <= cy < self.ny):
            return np.empty(0, dtype=np.int64)
        c = cx * self.ny + cy
        return self._order[self._start[c]:self._start[c + 1]]

    def _candidates(self, probes):
        """Pairs ``(probe, node)`` whose cells are adjacent (3x3 block)."""
        cx, cy = self._cell_of(probes)
        probe_parts, node_parts = [], []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                tx, ty = cx + dx, cy + dy
                ok = (tx >= 0) & (tx < self.nx) & (ty >= 0) & (ty < self.ny)
                p = np.nonzero(ok)[0]
                c = tx[p] * self.ny + ty[p]
                lo, hi = self._start[c], self._start[c + 1]
                cnt = hi - lo
                total = int(cnt.sum())
                if total == 0:
                    continue
                rep_probe = np.repeat(p, cnt)
                # position within each run: arange(total) minus run offsets
                offs = np.repeat(np.cumsum(cnt) - cnt, cnt)
                slot = np.repeat(lo, cnt) + (np.arange(total) - offs)
                probe_parts.append(rep_probe)
                node_parts.append(self._order[slot])
        if not probe_parts:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        return np.concatenate(probe_parts), np.concatenate(node_parts)

    def pairs(self, radius: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """All ordered pairs ``(i, j)``, ``i != j``, with ``|x_i - x_j| <= radius``.

        Sorted by ``i`` then ``j``.
        """
        r = self._check_radius(radius)
        xy = self.points.xy
        i, j = self._candidates(xy)
        keep = i != j
        i, j = i[keep], j[keep]
        d2 = np.sum((xy[i] - xy[j]) ** 2, axis=1)
        keep = d2 <= r * r
        i, j = i[keep], j[keep]
        order = np.lexsort((j, i))
        return i[order], j[order]

    def count_within(self, probes, radius: float | None = None) -> np.ndarray:
        """Number of nodes within ``radius`` of each probe location."""
        r = self._check_radius(radius)
        probes = np.asarray(probes, dtype=float).reshape(-1, 2)
        p, j = self._candidates(probes)
        d2 = np.sum((probes[p] - self.points.xy[j]) ** 2, axis=1)
        return np.bincount(p[d2 <= r * r], minlength=probes.shape[0])

    def _check_radius(self, radius):
        if radius is None:
            return self.radius
        if radius > self.radius:
            raise ValueError(f"query radius {radius} exceeds index radius {self.radius}")
        return float(radius)


def build_index(points: PointSet, radius: float) -> NeighborIndex:
    return NeighborIndex(points, radius)


def neighbors_within(index: NeighborIndex, center, radius: float | None = None) -> list[int]:
    """Indices of nodes within ``radius`` (closed ball) of ``center``.

    ``center`` is either a node index, in which case that node is excluded
    from the result, or an ``(x, y)`` location.
    """
    r = index._check_radius(radius)
    xy = index.points.xy
    if isinstance(center, (int, np.integer)):
        if not 0 <= center < len(xy):
            raise IndexError(f"unknown node index {center}")
        exclude = int(center)
        loc = xy[exclude]
    else:
        exclude = -1
        loc = np.asarray(center, dtype=float).reshape(2)
    cx, cy = index._cell_of(loc)
    cand = np.concatenate([
        index.cell_members(int(cx[0]) + dx, int(cy[0]) + dy)
        for dx in (-1, 0, 1) for dy in (-1, 0, 1)
    ])
    d2 = np.sum((xy[cand] - loc) ** 2, axis=1)
    hits = cand[(d2 <= r * r) & (cand != exclude)]
    return sorted(int(h) for h in hits)


def neighbors_bruteforce(points: PointSet, center, radius: float) -> list[int]:
    """Exhaustive-scan counterpart of :func:`neighbors_within`."""
    xy = points.xy
    if isinstance(center, (int, np.integer)):
        exclude, loc = int(center), xy[int(center)]
    else:
        exclude, loc = -1, np.asarray(center, dtype=float)
    out = []
    for k in range(len(xy)):
        if k == exclude:
            continue
        dx, dy = xy[k, 0] - loc[0], xy[k, 1] - loc[1]
        if dx * dx + dy * dy <= radius * radius:
            out.append(k)
    return out
