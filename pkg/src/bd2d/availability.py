"""Closed-form availability under a Poisson field of caching nodes, and the
placement objective with its optimisers."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .popularity import ZipfModel
from .spatial import Area, build_index, generate_ppp

__all__ = [
    "Intensity",
    "ObjectiveSpec",
    "prob_eta_nodes",
    "availability_analytic",
    "availability_per_content",
    "objective_value",
    "optimize_greedy",
    "optimize_bruteforce",
    "empirical_coverage",
    "BRUTEFORCE_MAX_CATALOG",
]

BRUTEFORCE_MAX_CATALOG = 6


@dataclass(frozen=True)
class Intensity:
    """Node density (per square meter) seen within a radius (meters)."""

    density: float
    radius: float

    def __post_init__(self):
        if self.density < 0 or self.radius < 0:
            raise ValueError("density and radius must be non-negative")

    @property
    def mu(self) -> float:
        """Expected node count inside the disc, ``density * pi * radius**2``."""
        return self.density * math.pi * self.radius ** 2


def prob_eta_nodes(intensity: Intensity, eta: int) -> float:
    """Poisson probability of exactly ``eta`` nodes within the radius."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    mu = intensity.mu
    if eta == 0:
        return math.exp(-mu)
    if mu == 0:
        return 0.0
    return math.exp(-mu + eta * math.log(mu) - math.lgamma(eta + 1))


def availability_analytic(intensity: Intensity) -> float:
    """Probability of at least one node within the radius."""
    return 1.0 - prob_eta_nodes(intensity, 0)


def availability_per_content(intensity: Intensity, q: float) -> float:
    """Availability of one content when only a fraction ``q`` of nodes cache it.

    Independent thinning of the field by ``q``; with ``q = 1`` this is
    :func:`availability_analytic`.
    """
    if not 0 <= q <= 1:
        raise ValueError(f"caching probability must be in [0, 1], got {q}")
    return 1.0 - math.exp(-intensity.mu * q)


@dataclass(frozen=True)
class ObjectiveSpec:
    request: ZipfModel
    requests: int
    intensity: Intensity
    capacity: float

    def __post_init__(self):
        if self.requests < 1:
            raise ValueError("request count must be >= 1")
        if self.capacity < 0:
            raise ValueError("capacity must be >= 0")

    def coefficients(self) -> np.ndarray:
        """Per-rank weight of ``Q_i`` in the objective."""
        return availability_analytic(self.intensity) * np.asarray(self.request.pmf) / self.requests


def _check_q(q, spec):
    q = np.asarray(q, dtype=float)
    if q.shape != (spec.request.catalog_size,):
        raise ValueError("caching vector length must equal the catalog size")
    if np.any(q < 0) or np.any(q > 1):
        raise ValueError("caching probabilities must lie in [0, 1]")
    return q


def objective_value(q, spec: ObjectiveSpec) -> float:
    """Mean availability ratio ``(1/R) sum_i (1 - exp(-mu)) P_r(i) Q_i``."""
    q = _check_q(q, spec)
    a = availability_analytic(spec.intensity)
    total = 0.0
    for p, qi in zip(spec.request.pmf, q):
        total += a * float(p) * float(qi)
    return total / spec.requests


def optimize_greedy(spec: ObjectiveSpec) -> np.ndarray:
    """Fill ranks in order of request probability until capacity runs out.

    Optimal for the linear objective under ``sum(Q) <= C`` and
    ``0 <= Q_i <= 1`` (fractional knapsack with unit weights).
    """
    L = spec.request.catalog_size
    q = np.zeros(L)
    order = np.argsort(-np.asarray(spec.request.pmf), kind="stable")
    left = float(spec.capacity)
    for i in order:
        if left <= 0:
            break
        q[i] = min(1.0, left)
        left -= q[i]
    return q


def optimize_bruteforce(spec: ObjectiveSpec, grid_step: float = 0.25) -> np.ndarray:
    """Exhaustive search over ``Q_i`` in ``{0, step, ..., 1}`` with ``sum(Q) <= C``.

    Ties go to the first grid point in lexicographic order.
    """
    L = spec.request.catalog_size
    if L > BRUTEFORCE_MAX_CATALOG:
        raise ValueError(
            f"brute force limited to catalogs of <= {BRUTEFORCE_MAX_CATALOG} files, got {L}")
    if not 0.05 - 1e-12 <= grid_step <= 0.5 + 1e-12:
        raise ValueError(f"grid step must be within [0.05, 0.5], got {grid_step}")
    steps = int(round(1.0 / grid_step))
    if abs(steps * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid step must divide 1, got {grid_step}")
    levels = np.arange(steps + 1)
    budget = math.floor(spec.capacity / grid_step + 1e-9)
    coef = spec.coefficients()

    best_val, best = -1.0, None
    # outer coordinates enumerated explicitly, last (up to) two vectorised
    n_inner = min(2, L)
    inner = np.array(list(itertools.product(levels, repeat=n_inner)))
    inner_sum = inner.sum(axis=1)
    inner_val = (inner * grid_step) @ coef[L - n_inner:]
    for outer in itertools.product(levels, repeat=L - n_inner):
        used = sum(outer)
        if used > budget:
            continue
        ok = inner_sum <= budget - used
        if not ok.any():
            continue
        outer_val = float(np.dot(np.array(outer) * grid_step, coef[:L - n_inner]))
        vals = np.where(ok, inner_val + outer_val, -np.inf)
        k = int(np.argmax(vals))
        if vals[k] > best_val + 1e-15:
            best_val = vals[k]
            best = np.concatenate([np.array(outer, dtype=float), inner[k].astype(float)])
    return best * grid_step


def empirical_coverage(density: float, radius: float, n_probes: int,
                       rng: np.random.Generator, area: Area | None = None,
                       realizations: int = 10) -> float:
    """Fraction of probe locations with at least one node within ``radius``.

    Nodes come from independent Poisson fields over ``area``; probes are
    uniform over the interior, at least ``radius`` from every edge, and split
    evenly across realizations.
    """
    area = area or Area(1000.0, 1000.0)
    if 2 * radius >= min(area.width, area.height):
        raise ValueError("radius leaves no interior for probes")
    per = [n_probes // realizations + (r < n_probes % realizations)
           for r in range(realizations)]
    covered = 0
    for count in per:
        ps = generate_ppp(density, area, rng)
        probes = rng.random((count, 2)) * (area.width - 2 * radius, area.height - 2 * radius)
        probes += radius
        if len(ps) == 0:
            continue
        index = build_index(ps, radius)
        covered += int(np.count_nonzero(index.count_within(probes) > 0))
    return covered / n_probes
