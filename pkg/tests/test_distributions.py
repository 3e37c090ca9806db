import math

import numpy as np
import pytest
from scipy import stats

from robpost.distributions import (
    Cauchy,
    Gaussian,
    Interval,
    TranslatedWeibull,
    make_family,
)
from robpost.errors import InfeasibleIntervalError, ParameterError

FAMILIES = [
    Gaussian(0.0, 1.0),
    Gaussian(-2.0, 9.0),
    Cauchy(0.0, 1.0),
    Cauchy(-2.0, 3.0),
    TranslatedWeibull(10.0, 2.0, 3.0),
    TranslatedWeibull(0.0, 1.0, 0.8),
]


def test_pdf_known_values():
    assert Gaussian(0.0, 1.0).pdf1(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi))
    # below the support the translated Weibull density is exactly zero
    assert TranslatedWeibull(10.0, 2.0, 3.0).pdf1(9.0) == 0.0
    assert TranslatedWeibull(0.0, 1.0, 1.0).pdf1(1.0) == pytest.approx(math.exp(-1.0))


def test_pdf_integrates_to_one():
    # start just inside the support: the density jumps at x0 for beta <= 1
    w = TranslatedWeibull(0.0, 1.0, 1.0)
    grid = np.linspace(1e-9, 40.0, 200001)
    total = np.trapezoid(w.pdf(grid), grid)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_cdf_known_values():
    assert Gaussian(0.0, 1.0).cdf1(0.0) == 0.5
    assert Cauchy(-2.0, 3.0).cdf1(-2.0) == pytest.approx(0.5)
    assert TranslatedWeibull(0.0, 1.0, 1.0).cdf1(1.0) == pytest.approx(1 - math.exp(-1.0))


def test_quantile_known_values():
    c = Cauchy(-2.0, 3.0)
    assert c.quantile(0.75) == pytest.approx(-2.0 + 3.0)
    assert Gaussian(0.0, 1.0).quantile(0.75) == pytest.approx(0.674490, abs=1e-6)
    w = TranslatedWeibull(10.0, 2.0, 3.0)
    assert w.quantile(0.5) == pytest.approx(10.0 + 2.0 * math.log(2.0) ** (1.0 / 3.0))


def test_quantile_domain_error():
    with pytest.raises(ParameterError):
        Gaussian(0.0, 1.0).quantile(0.0)
    with pytest.raises(ParameterError):
        Gaussian(0.0, 1.0).quantile(1.2)


@pytest.mark.parametrize("family", FAMILIES)
def test_cdf_monotone_and_bounded(family):
    lo = family.support_lo if math.isfinite(family.support_lo) else -50.0
    grid = np.linspace(lo, lo + 100.0, 2001)
    vals = np.atleast_1d(family.cdf(grid))
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    assert np.all(np.diff(vals) >= 0.0)
    assert np.all(np.atleast_1d(family.pdf(grid)) >= 0.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_quantile_cdf_roundtrip(family):
    ps = np.linspace(0.001, 0.999, 97)
    for p in ps:
        x = family.ppf1(p)
        assert family.cdf1(x) == pytest.approx(p, abs=1e-8)


@pytest.mark.parametrize("family", FAMILIES)
def test_scalar_vector_paths_agree(family):
    lo = family.support_lo if math.isfinite(family.support_lo) else -30.0
    grid = np.linspace(lo + 1e-9, lo + 60.0, 301)
    vec_cdf = np.atleast_1d(family.cdf(grid))
    vec_sf = np.atleast_1d(family.sf(grid))
    vec_lp = np.atleast_1d(family.logpdf(grid))
    for t in range(0, len(grid), 25):
        x = float(grid[t])
        assert family.cdf1(x) == pytest.approx(vec_cdf[t], rel=1e-12, abs=1e-300)
        assert family.sf1(x) == pytest.approx(vec_sf[t], rel=1e-12, abs=1e-300)
        if math.isfinite(vec_lp[t]):
            assert family.logpdf1(x) == pytest.approx(vec_lp[t], rel=1e-12)


def test_invalid_parameters_raise():
    with pytest.raises(ParameterError):
        Gaussian(0.0, -1.0)
    with pytest.raises(ParameterError):
        Cauchy(0.0, 0.0)
    with pytest.raises(ParameterError):
        TranslatedWeibull(0.0, 1.0, -2.0)
    with pytest.raises(ParameterError):
        make_family("lognormal", 0.0, 1.0)


def test_sampling_reproducible():
    g = Gaussian(0.0, 1.0)
    a = g.sample(np.random.default_rng(11), size=5)
    b = g.sample(np.random.default_rng(11), size=5)
    assert np.array_equal(a, b)


def test_cauchy_sample_median():
    c = Cauchy(0.0, 1.0)
    draws = c.sample(np.random.default_rng(3), size=100_000)
    assert abs(np.median(draws)) < 0.02


def test_weibull_sample_support():
    w = TranslatedWeibull(10.0, 2.0, 3.0)
    draws = w.sample(np.random.default_rng(4), size=10_000)
    assert draws.min() >= 10.0


def test_truncated_halfnormal_mean():
    g = Gaussian(0.0, 1.0)
    draws = g.sample_truncated(Interval(0.0, math.inf), np.random.default_rng(5), size=100_000)
    assert draws.mean() == pytest.approx(math.sqrt(2.0 / math.pi), abs=0.01)


@pytest.mark.parametrize("family", FAMILIES)
def test_truncated_draws_inside_interval(family):
    rng = np.random.default_rng(6)
    lo = family.ppf1(0.3)
    hi = family.ppf1(0.6)
    draws = family.sample_truncated((lo, hi), rng, size=2_000)
    assert np.all((draws > lo) & (draws < hi))


def test_truncated_narrow_interval_brackets_quantile():
    c = Cauchy(0.0, 1.0)
    q = c.quantile(0.75)
    rng = np.random.default_rng(7)
    draws = c.sample_truncated((0.999 * q, 1.001 * q), rng, size=500)
    assert np.all((draws > 0.999 * q) & (draws < 1.001 * q))


@pytest.mark.parametrize(
    "family,scipy_dist",
    [
        (Gaussian(0.0, 1.0), stats.norm()),
        (Cauchy(-2.0, 3.0), stats.cauchy(loc=-2.0, scale=3.0)),
        (TranslatedWeibull(10.0, 2.0, 3.0), stats.weibull_min(3.0, loc=10.0, scale=2.0)),
    ],
)
def test_truncated_ks_against_renormalized_cdf(family, scipy_dist):
    lo = family.ppf1(0.15)
    hi = family.ppf1(0.85)
    rng = np.random.default_rng(8)
    draws = family.sample_truncated((lo, hi), rng, size=100_000)
    c_lo, c_hi = scipy_dist.cdf(lo), scipy_dist.cdf(hi)

    def trunc_cdf(x):
        return (scipy_dist.cdf(x) - c_lo) / (c_hi - c_lo)

    d = stats.ks_1samp(draws, trunc_cdf).statistic
    assert d < 0.01


def test_truncated_deep_tail_stable():
    g = Gaussian(0.0, 1.0)
    rng = np.random.default_rng(9)
    draws = g.sample_truncated((8.5, 9.0), rng, size=2_000)
    assert np.all((draws > 8.5) & (draws < 9.0))
    # conditional mass concentrates near the inner edge of a deep-tail band
    assert np.median(draws) < 8.7


def test_zero_mass_interval_raises():
    w = TranslatedWeibull(10.0, 2.0, 3.0)
    with pytest.raises(InfeasibleIntervalError):
        w.sample_truncated((0.0, 5.0), np.random.default_rng(0))


def test_union_sampling_respects_masses():
    g = Gaussian(0.0, 1.0)
    rng = np.random.default_rng(10)
    draws = np.array(
        [g.sample_truncated_union([(-2.0, -1.0), (1.0, 2.0)], rng) for _ in range(4_000)]
    )
    assert np.all(((draws > -2) & (draws < -1)) | ((draws > 1) & (draws < 2)))
    # symmetric intervals: halves should be balanced
    frac = np.mean(draws > 0)
    assert 0.45 < frac < 0.55


def test_union_sampling_all_empty_raises():
    w = TranslatedWeibull(10.0, 2.0, 3.0)
    with pytest.raises(InfeasibleIntervalError):
        w.sample_truncated_union([(0.0, 1.0), (2.0, 3.0)], np.random.default_rng(0))


def test_interval_validates():
    with pytest.raises(ParameterError):
        Interval(2.0, 2.0)
    assert Interval(-math.inf, 0.0).contains(-5.0)
