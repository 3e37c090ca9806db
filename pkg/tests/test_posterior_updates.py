import math

import numpy as np
import pytest
from scipy import stats

from robpost.distributions import Cauchy, Gaussian, TranslatedWeibull
from robpost.errors import ConfigError
from robpost.posterior_updates import (
    MAD_EFFICIENCY,
    MAD_TO_SIGMA,
    MEDIAN_EFFICIENCY,
    CauchyPriors,
    NigParams,
    WeibullPriors,
    mh_theta_update,
    nig_approx_medmad,
    nig_posterior_given_x,
    sample_nig,
)


class TestNigUpdate:
    def test_hand_computed(self):
        post = nig_posterior_given_x([0.0, 0.0], NigParams(0.0, 1.0, 1.0, 1.0))
        assert post == NigParams(0.0, 3.0, 2.0, 1.0)

    def test_no_information_shift(self):
        prior = NigParams(1.5, 2.0, 3.0, 4.0)
        post = nig_posterior_given_x([1.5, 1.5, 1.5], prior)
        assert post.mu0 == prior.mu0
        assert post.beta == prior.beta

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            nig_posterior_given_x([], NigParams(0.0, 1.0, 1.0, 1.0))

    def test_biased_variance_used(self):
        x = np.array([0.0, 2.0])
        post = nig_posterior_given_x(x, NigParams(0.0, 1.0, 1.0, 1.0))
        # S^2 = 1 (divide by N), B = 1 + (2*1 + (2/3)*1)/2
        assert post.beta == pytest.approx(1.0 + 0.5 * (2.0 + (2.0 / 3.0)))

    def test_matches_grid_posterior(self):
        # brute-force 2-D quadrature over (mu, sigma2) for a 3-point sample
        x = np.array([0.4, -0.8, 1.1])
        prior = NigParams(0.0, 1.0, 2.0, 2.0)
        post = nig_posterior_given_x(x, prior)

        mus = np.linspace(-3, 3, 241)
        s2s = np.linspace(0.05, 8.0, 321)
        M, S = np.meshgrid(mus, s2s, indexing="ij")

        def log_nig(mu, s2, p):
            return (
                -(p.alpha + 1.5) * np.log(s2)
                - (p.beta + 0.5 * p.nu * (mu - p.mu0) ** 2) / s2
            )

        loglik = -1.5 * np.log(S) * 0 + sum(
            -0.5 * np.log(2 * np.pi * S) - 0.5 * (xi - M) ** 2 / S for xi in x
        )
        log_prior = (
            -(prior.alpha + 1.5) * np.log(S)
            - (prior.beta + 0.5 * prior.nu * (M - prior.mu0) ** 2) / S
        )
        grid_post = np.exp(log_prior + loglik - (log_prior + loglik).max())
        grid_post /= grid_post.sum()

        analytic = np.exp(log_nig(M, S, post) - log_nig(M, S, post).max())
        analytic /= analytic.sum()
        tv = 0.5 * np.abs(grid_post - analytic).sum()
        assert tv < 1e-3

    def test_invalid_hyperparameters(self):
        with pytest.raises(ConfigError):
            NigParams(0.0, -1.0, 1.0, 1.0)


class TestNigSampling:
    def test_sigma2_moment(self):
        rng = np.random.default_rng(0)
        params = NigParams(0.0, 1.0, 3.0, 2.0)
        draws = np.array([sample_nig(params, rng) for _ in range(100_000)])
        assert draws[:, 1].mean() == pytest.approx(params.beta / (params.alpha - 1), rel=0.02)

    def test_mu_centered(self):
        rng = np.random.default_rng(1)
        params = NigParams(-3.0, 4.0, 5.0, 2.0)
        draws = np.array([sample_nig(params, rng) for _ in range(20_000)])
        assert draws[:, 0].mean() == pytest.approx(-3.0, abs=0.02)

    def test_deterministic_under_seed(self):
        params = NigParams(0.0, 1.0, 3.0, 2.0)
        a = sample_nig(params, np.random.default_rng(7))
        b = sample_nig(params, np.random.default_rng(7))
        assert a == b

    def test_gibbs_self_consistency(self):
        # alternating the conjugate update on a fixed X reproduces direct
        # i.i.d. NIG sampling
        rng = np.random.default_rng(2)
        x = rng.standard_normal(20) * 2.0 - 1.0
        prior = NigParams(0.0, 1.0, 2.0, 2.0)
        post = nig_posterior_given_x(x, prior)
        chain = np.array([sample_nig(post, rng) for _ in range(50_000)])
        direct = np.array([sample_nig(post, np.random.default_rng(3)) for _ in range(50_000)])
        for col in (0, 1):
            d = stats.ks_2samp(chain[:, col], direct[:, col]).statistic
            assert d < 0.01


class TestMedMadApproximation:
    def test_constants(self):
        assert MEDIAN_EFFICIENCY == pytest.approx(2.0 / math.pi)
        assert MAD_EFFICIENCY == 0.3675
        assert MAD_TO_SIGMA == pytest.approx(1.4826, abs=2e-4)

    def test_paper_setting_values(self):
        prior = NigParams(0.0, 0.001, 0.001, 0.001)
        approx = nig_approx_medmad(-2.0, 3.0, 1000, prior)
        assert MEDIAN_EFFICIENCY * 1000 == pytest.approx(636.6, abs=0.05)
        assert MAD_EFFICIENCY * 1000 == pytest.approx(367.5)
        assert MAD_TO_SIGMA * 3.0 == pytest.approx(4.4478, abs=2e-4)
        assert approx.nu == pytest.approx(0.001 + 636.6198, abs=1e-3)
        assert approx.alpha == pytest.approx(0.001 + 183.75)
        assert approx.mu0 == pytest.approx(-2.0, abs=1e-4)

    def test_zero_n_returns_prior(self):
        prior = NigParams(0.5, 2.0, 3.0, 4.0)
        assert nig_approx_medmad(1.0, 2.0, 0, prior) == prior

    def test_centered_prior_drops_shift_term(self):
        prior = NigParams(-2.0, 1.0, 1.0, 1.0)
        approx = nig_approx_medmad(-2.0, 3.0, 100, prior)
        n_mad = MAD_EFFICIENCY * 100
        assert approx.beta == pytest.approx(1.0 + 0.5 * n_mad * (MAD_TO_SIGMA * 3.0) ** 2)


class TestThetaMh:
    def test_gaussian_rejected(self):
        with pytest.raises(ConfigError):
            mh_theta_update(Gaussian(0.0, 1.0), [0.0], None, np.random.default_rng(0), [0.1])

    def test_cauchy_scale_stays_positive(self):
        rng = np.random.default_rng(4)
        theta = Cauchy(0.0, 1.0)
        x = theta.sample(rng, 50)
        for _ in range(500):
            theta, _ = mh_theta_update(theta, x, CauchyPriors(), rng, [0.5, 0.5])
            assert theta.gamma > 0

    def test_weibull_location_above_min_rejected(self):
        rng = np.random.default_rng(5)
        x = np.array([1.0, 2.0, 3.0])
        theta = TranslatedWeibull(0.9999, 1.0, 1.0)
        rejected_all = True
        for _ in range(200):
            new, acc = mh_theta_update(
                theta, x, WeibullPriors(), rng, [5.0, 0.01, 0.01]
            )
            assert new.x0 < 1.0  # never exceeds min(x)
            if acc[0]:
                rejected_all = False
            theta = new
        assert not rejected_all  # moves below min(x) do happen

    def test_cauchy_posterior_recovers_location(self):
        rng = np.random.default_rng(6)
        truth = Cauchy(-2.0, 3.0)
        x = truth.sample(rng, 1000)
        theta = Cauchy(0.0, 1.0)
        draws = []
        for t in range(4_000):
            theta, _ = mh_theta_update(theta, x, CauchyPriors(), rng, [0.2, 0.1])
            if t >= 1_000:
                draws.append((theta.x0, theta.gamma))
        draws = np.array(draws)
        x0_mean, x0_sd = draws[:, 0].mean(), draws[:, 0].std()
        assert abs(x0_mean - (-2.0)) < 3 * max(x0_sd, 0.05) + 0.1

    def test_detailed_balance_against_quadrature(self):
        # long-run marginal of x0 on a tiny dataset vs grid quadrature
        x = np.array([-1.0, 0.5, 2.0])
        priors = CauchyPriors()
        rng = np.random.default_rng(8)
        theta = Cauchy(0.0, 1.0)
        draws = np.empty(60_000)
        for t in range(draws.size):
            theta, _ = mh_theta_update(theta, x, priors, rng, [0.8, 0.5])
            draws[t] = theta.x0

        grid_x0 = np.linspace(-15, 15, 301)
        grid_g = np.linspace(0.01, 25, 301)
        X0, G = np.meshgrid(grid_x0, grid_g, indexing="ij")
        logp = (
            -np.log1p((X0 / 10.0) ** 2)
            - 0.01 * G
            + sum(
                -np.log(np.pi * G) - np.log1p(((xi - X0) / G) ** 2) for xi in x
            )
        )
        post = np.exp(logp - logp.max())
        marg = post.sum(axis=1)
        marg /= np.trapezoid(marg, grid_x0)
        cdf = np.concatenate(
            [[0.0], np.cumsum((marg[1:] + marg[:-1]) * 0.5 * np.diff(grid_x0))]
        )
        cdf /= cdf[-1]
        d = stats.ks_1samp(draws[5000:], lambda v: np.interp(v, grid_x0, cdf)).statistic
        assert d < 0.05
