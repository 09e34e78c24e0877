import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special, stats

from geoinfluence.measures import (
    Boltzmann,
    Gaussian,
    MCConfig,
    ProductSpace,
    Shifted,
    Uniform01,
    chunk_rows,
    iso_profile,
    per_sample,
    sample,
    summarize,
    tail_bracket,
    translate,
)

RHOS = [1.0, 1.5, 2.0, 3.0]


@pytest.mark.parametrize("rho", RHOS)
def test_boltzmann_density_integrates_to_one(rho):
    m = Boltzmann(rho)
    total, _ = integrate.quad(lambda x: float(m.density(x)), -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("rho", RHOS)
@pytest.mark.parametrize("x", [-3.0, -0.7, 0.0, 0.4, 2.5])
def test_boltzmann_cdf_matches_quadrature(rho, x):
    m = Boltzmann(rho)
    val, _ = integrate.quad(lambda y: float(m.density(y)), -60.0, x, points=[0.0] if x > 0 else None,
                            epsabs=1e-13)
    assert float(m.cdf(x)) == pytest.approx(val, abs=1e-10)


def test_boltzmann_two_is_gaussian_with_half_variance():
    x = np.linspace(-4, 4, 41)
    np.testing.assert_allclose(Boltzmann(2.0).cdf(x), special.ndtr(math.sqrt(2) * x), atol=1e-14)
    np.testing.assert_allclose(Boltzmann(2.0).density(x), stats.norm(0, math.sqrt(0.5)).pdf(x), rtol=1e-12)


def test_boltzmann_one_is_laplace():
    x = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(Boltzmann(1.0).cdf(x), stats.laplace.cdf(x), atol=1e-14)


def test_boltzmann_rejects_small_rho():
    with pytest.raises(ValueError):
        Boltzmann(0.5)


@pytest.mark.parametrize("rho", RHOS)
def test_upper_tail_uses_survival_function(rho):
    m = Boltzmann(rho)
    z = 6.0
    ref, _ = integrate.quad(lambda y: float(m.density(y)), z, np.inf)
    assert float(m.sf(z)) == pytest.approx(ref, rel=1e-8)


@given(p=st.floats(1e-12, 1 - 1e-9), rho=st.sampled_from(RHOS))
def test_quantile_cdf_roundtrip(p, rho):
    m = Boltzmann(rho)
    assert abs(float(m.cdf(m.quantile(p))) - p) <= 1e-9


@given(x=st.floats(-8.0, 3.0), rho=st.sampled_from([1.5, 2.0, 3.0]))
def test_cdf_quantile_roundtrip_where_cdf_unsaturated(x, rho):
    # above the median one ulp of the CDF moves x by about 1e-16 / density
    m = Boltzmann(rho)
    if m.density(x) < (1e-300 if x <= 0 else 1e-5):
        return
    assert float(m.quantile(m.cdf(x))) == pytest.approx(x, abs=1e-9)


@pytest.mark.parametrize("m", [Gaussian(), Gaussian(1.0, 4.0), Boltzmann(1.5), Boltzmann(3.0)])
def test_fast_quantile_agrees_with_solver(m):
    p = np.concatenate([np.geomspace(1e-10, 0.5, 30), 1 - np.geomspace(1e-10, 0.49, 30)])
    np.testing.assert_allclose(m.fast_quantile(p), m.quantile(p), atol=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, np.nan])
def test_quantile_domain(p):
    with pytest.raises(ValueError):
        Boltzmann(2.0).quantile(p)


@pytest.mark.parametrize("rho", [1.2, 1.5, 2.0, 2.5, 3.0, 4.0])
@pytest.mark.parametrize("z", [0.5, 1.0, 2.0, 3.0, 4.0, 6.0])
def test_tail_bracket_contains_tail(rho, z):
    lo, hi = tail_bracket(rho, z)
    m = Boltzmann(rho)
    tail, _ = integrate.quad(lambda y: float(m.density(y)), z, z + 40.0, epsabs=0, epsrel=1e-12)
    assert tail <= hi * (1 + 1e-10)
    if lo > 0:
        assert lo <= tail * (1 + 1e-10)


@pytest.mark.parametrize("rho", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("z", [2.0, 6.0])
def test_tail_bracket_relative_width(rho, z):
    lo, hi = tail_bracket(rho, z)
    assert 1 - lo / hi == pytest.approx((rho - 1) / z, rel=1e-12)


def test_tail_bracket_upper_is_exact_at_rho_one():
    _, hi = tail_bracket(1.0, 1.0)
    assert hi == pytest.approx(math.exp(-1) / 2, rel=1e-15)


def test_gaussian_moments_and_quantile():
    m = Gaussian(1.0, 4.0)
    assert float(m.quantile(0.975)) == pytest.approx(1.0 + 2.0 * 1.959963984540054, abs=1e-12)
    assert float(m.cdf(1.0)) == 0.5


def test_uniform():
    m = Uniform01()
    assert float(m.cdf(0.25)) == 0.25
    assert float(m.quantile(0.3)) == 0.3
    assert float(m.density(2.0)) == 0.0


@pytest.mark.parametrize("m", [Gaussian(), Boltzmann(1.5), Boltzmann(3.0)])
def test_iso_profile_symmetric_with_peak_at_half(m):
    t = np.array([0.01, 0.2, 0.4])
    np.testing.assert_allclose(iso_profile(m, t), iso_profile(m, 1 - t), rtol=1e-9)
    assert float(iso_profile(m, 0.5)) == pytest.approx(float(m.density(0.0)), rel=1e-12)


@pytest.mark.parametrize("t", [0.0, 1.0])
def test_iso_profile_domain(t):
    with pytest.raises(ValueError):
        iso_profile(Gaussian(), t)


def test_translate():
    m = Boltzmann(1.5)
    assert translate(m, 0.0) is m
    s = translate(translate(m, 0.5), 0.25)
    assert isinstance(s, Shifted) and s.base is m and s.alpha == 0.75
    assert float(s.cdf(0.75)) == pytest.approx(0.5)
    assert float(s.quantile(0.3)) == pytest.approx(float(m.quantile(0.3)) + 0.75)


@pytest.mark.parametrize("kwargs", [dict(seed=-1), dict(seed=2**64), dict(seed=1, samples=50),
                                    dict(seed=1, workers=0)])
def test_mcconfig_validation(kwargs):
    with pytest.raises(ValueError):
        MCConfig(**kwargs)


@pytest.mark.parametrize("seed", [None, 1.5, "7", True])
def test_mcconfig_requires_integer_seed(seed):
    with pytest.raises(TypeError):
        MCConfig(seed)


def test_chunk_rows_depends_on_dimension_only():
    assert chunk_rows(1) == 2**14
    assert chunk_rows(64) == 2**14
    assert chunk_rows(10_000) == 64
    assert all(r & (r - 1) == 0 for r in map(chunk_rows, range(1, 3000, 37)))


def test_sample_is_reproducible_and_prefix_stable():
    P = ProductSpace.iid(Boltzmann(1.5), 3)
    a = sample(P, 9, 40_000)
    b = sample(P, 9, 40_000)
    assert a.tobytes() == b.tobytes()
    np.testing.assert_array_equal(sample(P, 9, 1234), a[:1234])
    assert not np.array_equal(sample(P, 10, 100), a[:100])


def test_sample_distribution():
    X = sample(ProductSpace.iid(Boltzmann(2.0), 2), 3, 50_000).ravel()
    assert stats.kstest(X, lambda x: Boltzmann(2.0).cdf(x)).pvalue > 1e-3


def test_per_sample_independent_of_worker_count():
    P = ProductSpace.iid(Gaussian(), 5)
    f = lambda X: np.sin(X).sum(axis=1)  # noqa: E731
    one = per_sample(P, MCConfig(4, 70_000, 1), f)
    three = per_sample(P, MCConfig(4, 70_000, 3), f)
    assert one.tobytes() == three.tobytes()


def test_heterogeneous_product_transform():
    P = ProductSpace((Gaussian(), Uniform01()))
    X = sample(P, 1, 2000)
    assert X[:, 1].min() >= 0 and X[:, 1].max() <= 1
    assert X[:, 0].min() < 0


def test_summarize():
    v = np.array([1.0, 2.0, 3.0, 4.0])
    mean, se = summarize(v)
    assert mean == 2.5
    assert se == pytest.approx(np.std(v, ddof=1) / 2)
