"""Truncated Zipf popularity over a ranked catalog."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ZipfModel", "zipf_pmf", "sample_rank", "sample_ranks", "top_k_mass"]


@dataclass(frozen=True)
class ZipfModel:
    """Zipf law over ranks ``1..catalog_size``.

    ``pmf[Y - 1]`` is the probability of rank ``Y``.
    """

    catalog_size: int
    exponent: float
    pmf: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)


def zipf_pmf(catalog_size: int, beta: float) -> ZipfModel:
    if catalog_size < 1:
        raise ValueError(f"catalog size must be >= 1, got {catalog_size}")
    if beta < 0:
        raise ValueError(f"Zipf exponent must be >= 0, got {beta}")
    weights = np.arange(1, catalog_size + 1, dtype=float) ** -float(beta)
    pmf = weights / weights.sum()
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0  # guard against round-off at the top
    pmf.setflags(write=False)
    cdf.setflags(write=False)
    return ZipfModel(int(catalog_size), float(beta), pmf, cdf)


def sample_ranks(model: ZipfModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` independent ranks (1-based) by inverse-CDF lookup."""
    u = rng.random(size)
    return np.searchsorted(model.cdf, u, side="right").astype(np.int64) + 1


def sample_rank(model: ZipfModel, rng: np.random.Generator) -> int:
    return int(sample_ranks(model, 1, rng)[0])


def top_k_mass(model: ZipfModel, k: int) -> float:
    """Probability mass of the ``k`` most popular ranks."""
    if not 0 <= k <= model.catalog_size:
        raise ValueError(f"k must be in 0..{model.catalog_size}, got {k}")
    if k == model.catalog_size:
        return 1.0
    return float(model.pmf[:k].sum())
