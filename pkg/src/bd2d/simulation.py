"""Seeded Monte Carlo engine for availability experiments.

One replication: place nodes, cluster them, fill caches, let every node
request one file, and count how many requests are served from the node's
own cache or from a same-cluster node within transmission range.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .caching import (
    MAX_SEGMENT_S,
    capacity_in_segments,
    place_complete_file,
    place_mpco,
    place_random,
)
from .clustering import NOISE, dbscan
from .popularity import zipf_pmf, sample_ranks
from .spatial import Area, build_index, generate_uniform

__all__ = [
    "POLICIES",
    "SWEEP_AXES",
    "ScenarioConfig",
    "ReplicationResult",
    "ExperimentResult",
    "replication_streams",
    "replication_points",
    "run_replication",
    "run_experiment",
    "run_sweep",
    "default_workers",
    "CSV_HEADER",
    "write_results_csv",
]

POLICIES = ("random", "mpco", "complete-file")
SWEEP_AXES = {
    "n_nodes": "n_nodes",
    "beta_pop": "beta_pop",
    "segment_duration": "segment_s",
    "segment_s": "segment_s",
    "policy": "policy",
    "epsilon_max": "epsilon_max",
}
THREADS_ENV = "B2D2D_THREADS"


@dataclass(frozen=True)
class ScenarioConfig:
    area_width: float = 1000.0
    area_height: float = 1000.0
    n_nodes: int = 1000
    epsilon_max: float = 100.0
    min_bsn: int = 2
    catalog_size: int = 1000
    beta_pop: float = 0.6
    beta_req: float = 0.6
    segment_s: float = 60.0
    cache_capacity_s: float = 240.0
    policy: str = "random"
    replications: int = 500
    base_seed: int = 1
    enforce_same_cluster: bool = True
    complete_file_draw: str = "popularity"

    def __post_init__(self):
        for name in ("n_nodes", "min_bsn", "catalog_size", "replications"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.min_bsn < 2:
            raise ValueError(f"min_bsn must be >= 2, got {self.min_bsn}")
        for name in ("area_width", "area_height", "epsilon_max", "segment_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.beta_pop < 0 or self.beta_req < 0:
            raise ValueError("Zipf exponents must be >= 0")
        if self.segment_s > MAX_SEGMENT_S:
            raise ValueError(f"segment_s must be <= {MAX_SEGMENT_S}, got {self.segment_s}")
        if self.segment_s > self.cache_capacity_s:
            raise ValueError(
                f"segment_s ({self.segment_s}) exceeds cache_capacity_s ({self.cache_capacity_s})")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.complete_file_draw not in ("popularity", "uniform"):
            raise ValueError("complete_file_draw must be 'popularity' or 'uniform'")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")

    @property
    def area(self) -> Area:
        return Area(self.area_width, self.area_height)

    @property
    def segments_per_node(self) -> int:
        """Cache slots per node; the complete-file baseline always uses one."""
        if self.policy == "complete-file":
            return 1
        k = capacity_in_segments(self.cache_capacity_s, self.segment_s)
        return min(k, self.catalog_size)


@dataclass(frozen=True)
class ReplicationResult:
    availability_ratio: float
    self_request_ratio: float
    n_clusters: int
    n_outliers: int


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    replications: list[ReplicationResult] = field(default_factory=list)

    def _column(self, name):
        return np.array([getattr(r, name) for r in self.replications], dtype=float)

    def mean(self, name: str) -> float:
        return float(self._column(name).mean())

    def std(self, name: str) -> float:
        """Sample standard deviation; zero for a single replication."""
        col = self._column(name)
        return float(col.std(ddof=1)) if col.size > 1 else 0.0

    @property
    def mean_availability(self) -> float:
        return self.mean("availability_ratio")

    @property
    def mean_self_request(self) -> float:
        return self.mean("self_request_ratio")


def replication_streams(base_seed: int, replication: int) -> list[np.random.Generator]:
    """Independent generators for (placement, caching, requests)."""
    seq = np.random.SeedSequence([base_seed, replication])
    return [np.random.default_rng(s) for s in seq.spawn(3)]


def replication_points(cfg: ScenarioConfig, replication: int):
    rng = replication_streams(cfg.base_seed, replication)[0]
    return generate_uniform(cfg.n_nodes, cfg.area, rng)


def run_replication(cfg: ScenarioConfig, replication: int) -> ReplicationResult:
    point_rng, cache_rng, request_rng = replication_streams(cfg.base_seed, replication)
    n = cfg.n_nodes
    points = generate_uniform(n, cfg.area, point_rng)
    index = build_index(points, cfg.epsilon_max)
    src, dst = index.pairs()
    clustering = dbscan(points, index, cfg.epsilon_max, cfg.min_bsn)

    L = cfg.catalog_size
    if cfg.policy == "random":
        cache = place_random(n, zipf_pmf(L, cfg.beta_pop), cfg.segments_per_node, cache_rng)
    elif cfg.policy == "mpco":
        cache = place_mpco(n, cfg.segments_per_node, L)
    else:
        cache = place_complete_file(n, zipf_pmf(L, cfg.beta_pop), cache_rng,
                                    cfg.complete_file_draw)

    wanted = sample_ranks(zipf_pmf(L, cfg.beta_req), n, request_rng)
    held = cache.ranks
    self_hit = np.any(held == wanted[:, None], axis=1)

    # src requests, dst serves
    labels = clustering.labels
    if cfg.enforce_same_cluster:
        ok = (labels[src] != NOISE) & (labels[src] == labels[dst])
        src, dst = src[ok], dst[ok]
    served = np.any(held[dst] == wanted[src][:, None], axis=1)
    hit = self_hit.copy()
    hit[src[served]] = True

    return ReplicationResult(
        availability_ratio=float(hit.sum()) / n,
        self_request_ratio=float(self_hit.sum()) / n,
        n_clusters=clustering.kappa,
        n_outliers=clustering.n_outliers,
    )


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _run_one(args):
    cfg, r = args
    return run_replication(cfg, r)


def run_experiment(cfg: ScenarioConfig, workers: int | None = None) -> ExperimentResult:
    """Run replications ``0..cfg.replications-1`` and collect them in order."""
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [(cfg, r) for r in range(cfg.replications)]
    if workers == 1 or cfg.replications == 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.replications)) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return ExperimentResult(cfg, results)


def run_sweep(cfg: ScenarioConfig, axis: str, values, workers: int | None = None) -> list[ExperimentResult]:
    """One experiment per value of ``axis``, all sharing ``cfg.base_seed``."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(SWEEP_AXES)}")
    name = SWEEP_AXES[axis]
    return [run_experiment(replace(cfg, **{name: v}), workers) for v in values]


CSV_HEADER = ["policy", "n_nodes", "beta_pop", "beta_req", "segment_s", "epsilon_m",
              "replication", "avail_ratio", "self_ratio", "n_clusters", "n_outliers"]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_results_csv(results: list[ExperimentResult], out=None) -> str:
    """Per-replication rows followed by ``mean`` and ``std`` rows per experiment."""
    buf = io.StringIO() if out is None else out
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for res in results:
        c = res.config
        head = [c.policy, c.n_nodes, format(c.beta_pop, "g"), format(c.beta_req, "g"),
                format(c.segment_s, "g"), format(c.epsilon_max, "g")]
        for r, rep in enumerate(res.replications):
            w.writerow(head + [r, _fmt(rep.availability_ratio), _fmt(rep.self_request_ratio),
                               rep.n_clusters, rep.n_outliers])
        for tag, agg in (("mean", res.mean), ("std", res.std)):
            w.writerow(head + [tag] + [_fmt(agg(k)) for k in
                                       ("availability_ratio", "self_request_ratio",
                                        "n_clusters", "n_outliers")])
    return buf.getvalue() if out is None else ""
