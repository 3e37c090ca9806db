"""Parameter updates given a complete latent sample.

For the Gaussian family with a Normal-Inverse-Gamma prior the posterior is
conjugate and sampled in closed form.  For the Cauchy and translated Weibull
families the update is a componentwise Gaussian random walk on the
unconstrained scale (log transform for positive parameters, with the
Jacobian in the acceptance ratio).

Also provides the closed-form NIG approximation to the posterior given only
(median, MAD): plug the robust estimates m and c*s into the conjugate
update and discount the sample size by the asymptotic efficiencies of the
median (2/pi) and the MAD (0.3675).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import Cauchy, Family, Gaussian, TranslatedWeibull
from .errors import ConfigError

# Asymptotic efficiency of the empirical median relative to the mean.
MEDIAN_EFFICIENCY = 2.0 / math.pi
# Asymptotic efficiency of the empirical MAD relative to the SD (literature value).
MAD_EFFICIENCY = 0.3675
# MAD-to-sigma conversion for the Gaussian: 1 / Phi^{-1}(0.75).
MAD_TO_SIGMA = 1.0 / float(special.ndtri(0.75))


@dataclass(frozen=True)
class NigParams:
    """Normal-Inverse-Gamma hyperparameters (mu0, nu, alpha, beta)."""

    mu0: float
    nu: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.nu > 0 and self.alpha > 0 and self.beta > 0):
            raise ConfigError(f"NIG requires nu, alpha, beta > 0, got {self}")

    def sigma2_mean(self) -> float:
        """Mean of the inverse-gamma sigma^2 marginal (alpha > 1)."""
        if self.alpha <= 1:
            return math.inf
        return self.beta / (self.alpha - 1.0)

    def mu_marginal_scale(self) -> float:
        """Scale of the Student-t marginal of mu (2*alpha degrees of freedom)."""
        return math.sqrt(self.beta / (self.alpha * self.nu))


@dataclass(frozen=True)
class GammaPrior:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ConfigError(f"Gamma prior requires shape, rate > 0, got {self}")

    def logpdf(self, x: float) -> float:
        if x <= 0:
            return -math.inf
        return (
            self.shape * math.log(self.rate)
            - math.lgamma(self.shape)
            + (self.shape - 1.0) * math.log(x)
            - self.rate * x
        )


@dataclass(frozen=True)
class CauchyLocPrior:
    center: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError(f"Cauchy prior requires scale > 0, got {self}")

    def logpdf(self, x: float) -> float:
        z = (x - self.center) / self.scale
        return -math.log(math.pi * self.scale) - math.log1p(z * z)


@dataclass(frozen=True)
class CauchyPriors:
    """Default weakly informative priors for (x0, gamma)."""

    location: CauchyLocPrior = CauchyLocPrior(0.0, 10.0)
    scale: GammaPrior = GammaPrior(1.0, 0.01)


@dataclass(frozen=True)
class WeibullPriors:
    """Flat prior on the location, Gamma priors on scale and shape."""

    scale: GammaPrior = GammaPrior(1.0, 0.01)
    shape: GammaPrior = GammaPrior(1.0, 0.01)


def nig_posterior_given_x(x, prior: NigParams) -> NigParams:
    """Conjugate NIG update given a complete Gaussian sample.

    M = (nu*mu0 + N*xbar) / (nu + N),  C = nu + N,  A = alpha + N/2,
    B = beta + (N*S^2 + N*nu/(nu+N) * (xbar - mu0)^2) / 2,
    with S^2 the biased (divide-by-N) empirical variance.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("cannot update on an empty sample")
    n = x.size
    xbar = float(x.mean())
    s2 = float(np.mean((x - xbar) ** 2))
    m = (prior.nu * prior.mu0 + n * xbar) / (prior.nu + n)
    c = prior.nu + n
    a = prior.alpha + 0.5 * n
    b = prior.beta + 0.5 * (n * s2 + n * prior.nu / (prior.nu + n) * (xbar - prior.mu0) ** 2)
    return NigParams(mu0=m, nu=c, alpha=a, beta=b)


def sample_nig(params: NigParams, rng) -> tuple[float, float]:
    """Draw (mu, sigma2): sigma2 ~ InvGamma(A, B), mu | sigma2 ~ N(M, sigma2/C)."""
    sigma2 = params.beta / rng.gamma(params.alpha)
    mu = rng.normal(params.mu0, math.sqrt(sigma2 / params.nu))
    return float(mu), float(sigma2)


def nig_approx_medmad(m: float, s: float, n: int, prior: NigParams) -> NigParams:
    """Closed-form NIG approximation to the (median, MAD) posterior.

    Replaces the sample mean by m and the SD by c*s with c = 1/Phi^{-1}(3/4),
    and discounts N by the estimators' asymptotic efficiencies.  At n = 0 the
    prior is returned unchanged.
    """
    if n < 0:
        raise ValueError(f"sample size must be >= 0, got {n}")
    if n > 0 and not s > 0:
        raise ConfigError(f"MAD must be positive, got {s}")
    n_med = MEDIAN_EFFICIENCY * n
    n_mad = MAD_EFFICIENCY * n
    sigma_hat = MAD_TO_SIGMA * s
    m_tilde = (prior.nu * prior.mu0 + n_med * m) / (prior.nu + n_med)
    c_tilde = prior.nu + n_med
    a_tilde = prior.alpha + 0.5 * n_mad
    b_tilde = prior.beta + 0.5 * (
        n_mad * sigma_hat**2
        + n_mad * prior.nu / (prior.nu + n_mad) * (m - prior.mu0) ** 2
    )
    return NigParams(mu0=m_tilde, nu=c_tilde, alpha=a_tilde, beta=b_tilde)


def _cauchy_logpost(theta: Cauchy, x, priors: CauchyPriors) -> float:
    lp = priors.location.logpdf(theta.x0) + priors.scale.logpdf(theta.gamma)
    if lp == -math.inf:
        return -math.inf
    return lp + theta.loglik(x)


def _weibull_logpost(theta: TranslatedWeibull, x, priors: WeibullPriors) -> float:
    lp = priors.scale.logpdf(theta.gamma) + priors.shape.logpdf(theta.beta)
    if lp == -math.inf:
        return -math.inf
    return lp + theta.loglik(x)


def mh_theta_update(
    family: Family,
    x,
    priors,
    rng,
    scales,
) -> tuple[Family, np.ndarray]:
    """One componentwise random-walk update of the family parameters.

    Location parameters walk on their natural scale; positive parameters
    (gamma, beta) walk in log space, with the log-Jacobian included in the
    ratio.  Candidates with zero likelihood (for the Weibull, any x0 above
    min(x)) are rejected.  Returns the new parameters and accept flags.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(family, Cauchy):
        names = ("x0", "log_gamma")
        vec = np.array([family.x0, math.log(family.gamma)])

        def build(v):
            return Cauchy(x0=float(v[0]), gamma=float(math.exp(v[1])))

        def logpost(v, theta):
            # + v[1] is the log-scale Jacobian
            return _cauchy_logpost(theta, x, priors) + v[1]

    elif isinstance(family, TranslatedWeibull):
        names = ("x0", "log_gamma", "log_beta")
        vec = np.array([family.x0, math.log(family.gamma), math.log(family.beta)])

        def build(v):
            return TranslatedWeibull(
                x0=float(v[0]), gamma=float(math.exp(v[1])), beta=float(math.exp(v[2]))
            )

        def logpost(v, theta):
            return _weibull_logpost(theta, x, priors) + v[1] + v[2]

    elif isinstance(family, Gaussian):
        raise ConfigError("the Gaussian family has a conjugate update; use sample_nig")
    else:
        raise ConfigError(f"no Metropolis update implemented for {type(family).__name__}")

    scales = np.asarray(scales, dtype=float)
    if scales.shape != (len(names),):
        raise ValueError(f"need {len(names)} proposal scales {names}, got {scales.shape}")

    theta = family
    cur = logpost(vec, theta)
    accepted = np.zeros(len(names), dtype=bool)
    for t in range(len(names)):
        prop = vec.copy()
        prop[t] += scales[t] * rng.standard_normal()
        cand = build(prop)
        new = logpost(prop, cand)
        if new > -math.inf and (new >= cur or rng.random() < math.exp(new - cur)):
            vec, theta, cur = prop, cand, new
            accepted[t] = True
    return theta, accepted
