import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bd2d.caching import (
    CacheBudget,
    CachePlacement,
    SegmentSpec,
    capacity_in_segments,
    place_complete_file,
    place_mpco,
    place_random,
    segment_size,
)
from bd2d.popularity import zipf_pmf


def sequential_inclusion(pmf, k, rank, draws, rng):
    """Inclusion probability of ``rank`` in ``k`` successive renormalised draws.

    Each step draws from the full pmf and redraws entries already taken,
    which is the renormalised law; independent of the exponential-key sampler.
    """
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    taken = np.zeros((draws, k), dtype=np.int64)
    for step in range(k):
        pending = np.arange(draws)
        while pending.size:
            pick = np.searchsorted(cdf, rng.random(pending.size), side="right") + 1
            dup = np.any(taken[pending, :step] == pick[:, None], axis=1)
            taken[pending[~dup], step] = pick[~dup]
            pending = pending[dup]
    return np.mean(np.any(taken == rank, axis=1))


def test_segment_size():
    assert segment_size(60, 2) == 120
    assert segment_size(15, 2) == 30
    with pytest.raises(ValueError):
        segment_size(0, 2)
    with pytest.raises(ValueError):
        segment_size(10, -1)
    assert SegmentSpec(20, 3).size_mb == 60
    with pytest.raises(ValueError):
        SegmentSpec(300, 1)


@pytest.mark.parametrize("cap,dur,k", [(240, 60, 4), (240, 15, 16), (240, 240, 1),
                                       (240, 20, 12), (240, 30, 8), (240, 96, 2)])
def test_capacity_in_segments(cap, dur, k):
    assert capacity_in_segments(cap, dur) == k
    assert CacheBudget(cap, dur).segments_per_node * dur <= cap


def test_capacity_rejects_oversized_segment():
    with pytest.raises(ValueError):
        capacity_in_segments(30, 60)


def test_random_saturated():
    pl = place_random(20, zipf_pmf(6, 1.0), 6, np.random.default_rng(0))
    assert np.all(pl.ranks == np.arange(1, 7))
    np.testing.assert_array_equal(pl.frequencies(), np.ones(6))


def test_random_rejects_large_k():
    with pytest.raises(ValueError):
        place_random(5, zipf_pmf(3, 1.0), 4, np.random.default_rng(0))


def test_random_inclusion_matches_sequential_oracle():
    model = zipf_pmf(1000, 1.0)
    oracle = sequential_inclusion(model.pmf, 4, 1, 1_000_000, np.random.default_rng(99))
    pl = place_random(2000, model, 4, np.random.default_rng(5))
    assert pl.frequencies()[0] == pytest.approx(oracle, abs=0.03)


def test_random_full_inclusion_profile_small_catalog():
    model = zipf_pmf(6, 0.8)
    rng = np.random.default_rng(12)
    oracle = [sequential_inclusion(model.pmf, 3, r, 200_000, rng) for r in range(1, 7)]
    q = place_random(200_000, model, 3, np.random.default_rng(13)).frequencies()
    np.testing.assert_allclose(q, oracle, atol=0.006)


def test_random_deterministic_and_nested_in_k():
    model = zipf_pmf(200, 0.6)
    a = place_random(50, model, 4, np.random.default_rng(3))
    b = place_random(50, model, 4, np.random.default_rng(3))
    c = place_random(50, model, 16, np.random.default_rng(3))
    np.testing.assert_array_equal(a.ranks, b.ranks)
    for small, big in zip(a.ranks, c.ranks):
        assert set(small) <= set(big)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 60), st.integers(1, 40), st.floats(0, 2), st.data())
def test_random_rows_distinct_and_in_range(n, L, beta, data):
    k = data.draw(st.integers(1, L))
    pl = place_random(n, zipf_pmf(L, beta), k, np.random.default_rng(n))
    assert pl.ranks.shape == (n, k)
    for row in pl.ranks:
        assert len(set(row.tolist())) == k
    if n:
        assert pl.ranks.min() >= 1 and pl.ranks.max() <= L
    q = pl.frequencies()
    assert np.all((0 <= q) & (q <= 1))


def test_mpco():
    pl = place_mpco(7, 4, 1000)
    assert np.all(pl.ranks == [1, 2, 3, 4])
    q = pl.frequencies()
    assert q[:4].tolist() == [1.0] * 4 and not q[4:].any()
    with pytest.raises(ValueError):
        place_mpco(3, 0, 10)
    with pytest.raises(ValueError):
        place_mpco(3, 11, 10)


def test_mpco_empty():
    pl = place_mpco(0, 4, 10)
    assert pl.n_nodes == 0
    assert pl.frequencies().tolist() == [0.0] * 10


def test_complete_file_single_title():
    pl = place_complete_file(30, zipf_pmf(1, 1.0), np.random.default_rng(0))
    assert pl.per_node == 1 and pl.frequencies().tolist() == [1.0]


def test_complete_file_matches_popularity():
    model = zipf_pmf(1000, 0.6)
    pl = place_complete_file(10_000, model, np.random.default_rng(4))
    assert np.max(np.abs(pl.frequencies() - model.pmf)) < 0.01


def test_complete_file_deterministic_and_uniform_switch():
    model = zipf_pmf(50, 1.0)
    a = place_complete_file(40, model, np.random.default_rng(1))
    b = place_complete_file(40, model, np.random.default_rng(1))
    np.testing.assert_array_equal(a.ranks, b.ranks)
    u = place_complete_file(20_000, model, np.random.default_rng(2), draw="uniform")
    assert np.max(np.abs(u.frequencies() - 1 / 50)) < 0.01
    with pytest.raises(ValueError):
        place_complete_file(3, model, np.random.default_rng(2), draw="other")


def test_segments_cover_more_catalog_than_complete_files():
    model = zipf_pmf(1000, 1.0)
    seg, full = [], []
    for r in range(100):
        seg.append(place_random(200, model, 4, np.random.default_rng([r, 0])).distinct_ranks())
        full.append(place_complete_file(200, model, np.random.default_rng([r, 1])).distinct_ranks())
    assert np.mean(seg) > np.mean(full)


def test_placement_validation():
    with pytest.raises(ValueError):
        CachePlacement(np.array([1, 2, 3]), 5)
    pl = CachePlacement(np.array([[1, 3]]), 5)
    assert pl.contains(0, 3) and not pl.contains(0, 2)
