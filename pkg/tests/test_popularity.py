import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from bd2d.popularity import sample_rank, sample_ranks, top_k_mass, zipf_pmf


def test_uniform_limit():
    np.testing.assert_allclose(zipf_pmf(4, 0.0).pmf, [0.25] * 4, rtol=0, atol=1e-15)


def test_harmonic_case_exact():
    np.testing.assert_allclose(zipf_pmf(4, 1.0).pmf, [12 / 25, 6 / 25, 4 / 25, 3 / 25],
                               rtol=0, atol=1e-15)


def test_single_file():
    assert zipf_pmf(1, 0.8).pmf.tolist() == [1.0]
    rng = np.random.default_rng(0)
    assert all(sample_rank(zipf_pmf(1, 2.0), rng) == 1 for _ in range(20))


@pytest.mark.parametrize("L,beta", [(0, 1.0), (5, -0.1)])
def test_rejects_bad_parameters(L, beta):
    with pytest.raises(ValueError):
        zipf_pmf(L, beta)


def test_sampler_frequencies_small_catalog():
    draws = sample_ranks(zipf_pmf(4, 1.0), 1_000_000, np.random.default_rng(21))
    freq = np.bincount(draws, minlength=5)[1:] / draws.size
    np.testing.assert_allclose(freq, [0.48, 0.24, 0.16, 0.12], atol=0.005)


def test_sampler_chisquare_table_ii_catalog():
    model = zipf_pmf(1000, 0.6)
    draws = sample_ranks(model, 1_000_000, np.random.default_rng(4))
    observed = np.bincount(draws, minlength=1001)[1:]
    assert stats.chisquare(observed, model.pmf * draws.size).pvalue > 0.01


def test_sample_deterministic():
    m = zipf_pmf(100, 0.8)
    a = sample_ranks(m, 50, np.random.default_rng(8))
    b = sample_ranks(m, 50, np.random.default_rng(8))
    assert a.tolist() == b.tolist()
    assert a.min() >= 1 and a.max() <= 100


def test_top_k_mass():
    m = zipf_pmf(4, 1.0)
    assert top_k_mass(m, 0) == 0.0
    assert top_k_mass(m, 4) == 1.0
    assert top_k_mass(m, 2) == pytest.approx(0.72, abs=1e-15)
    with pytest.raises(ValueError):
        top_k_mass(m, 5)


@given(st.integers(1, 3000), st.floats(0.0, 3.0))
def test_normalised_and_monotone(L, beta):
    pmf = zipf_pmf(L, beta).pmf
    assert abs(pmf.sum() - 1.0) <= 1e-12
    assert np.all(pmf > 0)
    assert np.all(np.diff(pmf) <= 1e-18)


@given(st.integers(2, 500), st.floats(0.0, 2.0), st.floats(0.0, 1.0), st.data())
def test_top_k_mass_monotone_in_k_and_beta(L, beta, extra, data):
    k = data.draw(st.integers(1, L))
    m = zipf_pmf(L, beta)
    assert top_k_mass(m, k - 1) <= top_k_mass(m, k) + 1e-15
    assert top_k_mass(m, k) <= top_k_mass(zipf_pmf(L, beta + extra), k) + 1e-12
