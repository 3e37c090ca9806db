"""Two-block Gibbs sampler, ABC-rejection baseline and chain diagnostics.

Each iteration first resamples the latent vector X given the observed robust
statistics and the current parameters, then resamples the parameters given
the completed X (conjugate draw for the Gaussian, random-walk Metropolis for
the Cauchy and translated Weibull).  Chains are deterministic given their
seed; the generator is numpy's default PCG64.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .distributions import Cauchy, Family, Gaussian, TranslatedWeibull
from .errors import ConfigError, DiagnosticsError
from .latent import ScaleAdapter
from .med_iqr_conditional import (
    MedIqrConstraints,
    init_mediqr_state,
    mediqr_proposal_scales,
    mh_update_mediqr,
    refill_free_coordinates_mediqr,
)
from .med_mad_conditional import (
    MedMadConstraints,
    audit_medmad,
    gibbs_sweep_medmad,
    init_medmad_state,
    make_zone_cache,
)
from .order_stats import empirical_mad, empirical_median, empirical_quantile
from .posterior_updates import (
    MAD_TO_SIGMA,
    CauchyPriors,
    NigParams,
    WeibullPriors,
    mh_theta_update,
    nig_posterior_given_x,
    sample_nig,
)
from .quantile_conditional import (
    QuantileConstraints,
    init_quantile_state,
    mh_update_orderstats,
    proposal_scales,
    refill_free_coordinates,
)

GENERATOR_NAME = "numpy-default-rng(PCG64)"


@dataclass(frozen=True)
class QuantileSummary:
    """Observed empirical quantiles (p_j, q_j) from a sample of size n."""

    n: int
    probs: tuple
    values: tuple


@dataclass(frozen=True)
class MedianIqrSummary:
    n: int
    median: float
    iqr: float


@dataclass(frozen=True)
class MedianMadSummary:
    n: int
    median: float
    mad: float


RobustConstraint = Union[QuantileSummary, MedianIqrSummary, MedianMadSummary]


@dataclass
class GibbsConfig:
    """Run-length and kernel settings for one chain."""

    iterations: int
    burn_in: int | None = None  # default: 5N after deterministic init, else max(1000, T/10)
    thin: int = 1
    seed: int = 0
    mh_scale: float = 1.0
    theta_scales: tuple | None = None
    n_pairs: int | None = None
    init_mode: str = "linear"
    adapt: bool = True
    exact_pairs: bool = True
    theta0: Family | None = None

    def resolve_burn_in(self, n: int) -> int:
        if self.burn_in is not None:
            b = self.burn_in
        elif self.init_mode == "deterministic":
            b = 5 * n
        else:
            b = max(1000, self.iterations // 10)
        b = min(b, max(self.iterations - 1, 0))
        if not 0 <= b < self.iterations:
            raise ConfigError(
                f"burn-in {b} must lie in [0, iterations) = [0, {self.iterations})"
            )
        return b

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.thin < 1:
            raise ConfigError(f"thin must be >= 1, got {self.thin}")
        if self.burn_in is not None and not 0 <= self.burn_in < self.iterations:
            raise ConfigError(
                f"burn-in must lie in [0, iterations), got {self.burn_in}"
            )


@dataclass
class ChainOutput:
    """Retained parameter draws plus run diagnostics."""

    draws: np.ndarray
    param_names: tuple
    iters: np.ndarray
    accept_rates: dict
    kd_census: dict | None
    seed: int
    burn_in: int
    thin: int
    wall_clock: float
    generator: str = GENERATOR_NAME
    extras: dict = field(default_factory=dict)

    def component(self, name: str) -> np.ndarray:
        return self.draws[:, self.param_names.index(name)]


def _default_theta0(family_name: str, constraint: RobustConstraint) -> Family:
    """Rough moment-matched starting parameters, feasible for the constraint."""
    if isinstance(constraint, MedianMadSummary):
        loc, scale = constraint.median, constraint.mad
        span = 3.0 * scale
    elif isinstance(constraint, MedianIqrSummary):
        loc, scale = constraint.median, constraint.iqr / 2.0
        span = 1.5 * constraint.iqr
    else:
        vals = constraint.values
        loc = vals[len(vals) // 2]
        scale = max((vals[-1] - vals[0]) / 2.0, 1e-3)
        span = 2.0 * (vals[-1] - vals[0]) + 1e-3
    if family_name == "gaussian":
        return Gaussian(mu=loc, sigma2=(MAD_TO_SIGMA * scale) ** 2)
    if family_name == "cauchy":
        return Cauchy(x0=loc, gamma=scale)
    if family_name == "weibull3":
        if isinstance(constraint, QuantileSummary):
            lo = constraint.values[0]
        else:
            lo = loc - span
        return TranslatedWeibull(x0=lo - span, gamma=2.0 * scale + span, beta=1.5)
    raise ConfigError(f"unknown family name {family_name!r}")


def _family_name(family: Family) -> str:
    return {Gaussian: "gaussian", Cauchy: "cauchy", TranslatedWeibull: "weibull3"}[
        type(family)
    ]


def default_priors(family: Family):
    if isinstance(family, Gaussian):
        return NigParams(0.0, 0.001, 0.001, 0.001)
    if isinstance(family, Cauchy):
        return CauchyPriors()
    return WeibullPriors()


def _default_theta_scales(family: Family) -> np.ndarray:
    if isinstance(family, Cauchy):
        return np.array([0.5, 0.3])
    return np.array([0.5, 0.3, 0.3])


class _LatentBlock:
    """Dispatch wrapper: one object per constraint variant."""

    def __init__(self, constraint: RobustConstraint, theta0: Family, config: GibbsConfig, rng):
        self.kind = type(constraint).__name__
        if isinstance(constraint, QuantileSummary):
            self.cons = QuantileConstraints(constraint.n, constraint.probs, constraint.values)
            self.state = init_quantile_state(self.cons, theta0, rng)
        elif isinstance(constraint, MedianIqrSummary):
            self.cons = MedIqrConstraints(constraint.n, constraint.median, constraint.iqr)
            self.state = init_mediqr_state(self.cons, theta0, rng, mode=config.init_mode)
        elif isinstance(constraint, MedianMadSummary):
            self.cons = MedMadConstraints(constraint.n, constraint.median, constraint.mad)
            self.state = init_medmad_state(self.cons, theta0, rng, mode=config.init_mode)
            self.cache = make_zone_cache(self.state)
        else:
            raise ConfigError(f"unknown constraint variant {type(constraint).__name__}")
        self.config = config
        self.is_medmad = isinstance(constraint, MedianMadSummary)
        if not self.is_medmad:
            n_free = (
                self.cons.n_free
                if isinstance(constraint, QuantileSummary)
                else len(self.state.layout.free_indices)
            )
            self.adapter = ScaleAdapter(n_free) if config.adapt and n_free else None

    def update(self, family: Family, rng) -> float:
        """One latent sweep; returns the MH acceptance fraction (nan for MedMad)."""
        if self.is_medmad:
            gibbs_sweep_medmad(
                self.state,
                family,
                rng,
                n_pairs=self.config.n_pairs,
                cache=self.cache,
                exact=self.config.exact_pairs,
            )
            return math.nan
        if self.kind == "QuantileSummary":
            base = proposal_scales(self.cons, family)
            mult = self.adapter.scales() if self.adapter else 1.0
            acc = mh_update_orderstats(
                self.state, family, rng, scale=self.config.mh_scale, scales=base * mult
            )
            refill_free_coordinates(self.state, family, rng)
        else:
            base = mediqr_proposal_scales(self.cons, family)
            mult = self.adapter.scales() if self.adapter else 1.0
            acc = mh_update_mediqr(
                self.state, family, rng, scale=self.config.mh_scale, scales=base * mult
            )
            refill_free_coordinates_mediqr(self.state, family, rng)
        if self.adapter:
            self.adapter.update(acc)
        return float(acc.mean()) if acc.size else math.nan

    def freeze_adaptation(self):
        if not self.is_medmad and self.adapter:
            self.adapter.freeze()

    @property
    def x(self) -> np.ndarray:
        return self.state.x


def run_chain(
    family: Family | str,
    constraint: RobustConstraint,
    priors=None,
    config: GibbsConfig | None = None,
) -> ChainOutput:
    """Run the two-block Gibbs sampler and return retained parameter draws.

    ``family`` may be a family instance (used as the starting parameters) or
    a name ('gaussian', 'cauchy', 'weibull3') with automatic initialization.
    """
    if config is None:
        config = GibbsConfig(iterations=2000)
    if isinstance(family, str):
        theta = config.theta0 or _default_theta0(family, constraint)
    else:
        theta = config.theta0 or family
    fam_name = _family_name(theta)
    if priors is None:
        priors = default_priors(theta)

    rng = np.random.default_rng(config.seed)
    burn_in = config.resolve_burn_in(constraint.n)
    t0 = time.perf_counter()
    block = _LatentBlock(constraint, theta, config, rng)

    gaussian = isinstance(theta, Gaussian)
    theta_scales = np.asarray(
        config.theta_scales if config.theta_scales is not None else _default_theta_scales(theta),
        dtype=float,
    ) if not gaussian else None
    theta_adapter = (
        ScaleAdapter(len(theta_scales)) if (not gaussian and config.adapt) else None
    )

    names = theta.param_names
    kept_iters = list(range(burn_in, config.iterations, config.thin))
    draws = np.empty((len(kept_iters), len(names)))
    keep_set = {it: t for t, it in enumerate(kept_iters)}

    latent_acc = []
    theta_acc = []
    census: dict = {}

    for it in range(config.iterations):
        if it == burn_in:
            block.freeze_adaptation()
            if theta_adapter:
                theta_adapter.freeze()
        a = block.update(theta, rng)
        if not math.isnan(a):
            latent_acc.append(a)
        x = block.x
        if gaussian:
            post = nig_posterior_given_x(x, priors)
            mu, sigma2 = sample_nig(post, rng)
            theta = Gaussian(mu=mu, sigma2=sigma2)
        else:
            mult = theta_adapter.scales() if theta_adapter else 1.0
            theta, acc = mh_theta_update(theta, x, priors, rng, theta_scales * mult)
            theta_acc.append(acc)
            if theta_adapter:
                theta_adapter.update(acc)
        if block.is_medmad and it >= burn_in:
            audit = audit_medmad(block.state)
            key = (
                (audit.k, audit.delta)
                if audit.k is not None
                else (audit.pins["delta1"], audit.pins["delta2"])
            )
            census[key] = census.get(key, 0) + 1
        t = keep_set.get(it)
        if t is not None:
            draws[t] = [getattr(theta, nm) for nm in names]

    accept_rates = {}
    if latent_acc:
        accept_rates["latent_mh"] = float(np.mean(latent_acc))
    if theta_acc:
        rates = np.mean(np.asarray(theta_acc, dtype=float), axis=0)
        for nm, r in zip(("x0", "gamma", "beta"), rates):
            accept_rates[f"theta_{nm}"] = float(r)

    return ChainOutput(
        draws=draws,
        param_names=names,
        iters=np.asarray(kept_iters),
        accept_rates=accept_rates,
        kd_census=census if block.is_medmad else None,
        seed=config.seed,
        burn_in=burn_in,
        thin=config.thin,
        wall_clock=time.perf_counter() - t0,
        extras={"family": fam_name, "n": constraint.n},
    )


# ---------------------------------------------------------------------------
# ABC-rejection baseline
# ---------------------------------------------------------------------------


@dataclass
class AbcConfig:
    n_sims: int
    keep: int
    seed: int = 0

    def __post_init__(self):
        if self.keep > self.n_sims:
            raise ConfigError(f"keep = {self.keep} exceeds n_sims = {self.n_sims}")
        if self.keep < 1:
            raise ConfigError(f"keep must be >= 1, got {self.keep}")


@dataclass
class AbcOutput:
    draws: np.ndarray
    param_names: tuple
    distances: np.ndarray
    standardization: np.ndarray
    seed: int
    n_sims: int
    wall_clock: float
    generator: str = GENERATOR_NAME


def _constraint_summaries(constraint: RobustConstraint, x: np.ndarray) -> np.ndarray:
    if isinstance(constraint, MedianMadSummary):
        return np.array([empirical_median(x), empirical_mad(x)])
    if isinstance(constraint, MedianIqrSummary):
        return np.array(
            [
                empirical_median(x),
                empirical_quantile(x, 0.75) - empirical_quantile(x, 0.25),
            ]
        )
    return np.array([empirical_quantile(x, p) for p in constraint.probs])


def _constraint_targets(constraint: RobustConstraint) -> np.ndarray:
    if isinstance(constraint, MedianMadSummary):
        return np.array([constraint.median, constraint.mad])
    if isinstance(constraint, MedianIqrSummary):
        return np.array([constraint.median, constraint.iqr])
    return np.array(constraint.values)


def abc_rejection(
    family: Family | str,
    constraint: RobustConstraint,
    priors=None,
    abc_config: AbcConfig | None = None,
) -> AbcOutput:
    """Likelihood-free rejection baseline on the same summary statistics.

    Simulates parameters from the prior, a dataset of size N per parameter,
    computes the summaries, and keeps the ``keep`` draws with the smallest
    standardized Euclidean distance (componentwise division by the
    prior-predictive standard deviation of each summary).
    """
    if abc_config is None:
        abc_config = AbcConfig(n_sims=1000, keep=100)
    if isinstance(family, str):
        fam_name = family
    else:
        fam_name = _family_name(family)
    if fam_name == "weibull3":
        raise ConfigError(
            "ABC baseline is not available for the translated Weibull: its flat "
            "location prior cannot be simulated"
        )
    if priors is None:
        priors = (
            NigParams(0.0, 0.001, 0.001, 0.001) if fam_name == "gaussian" else CauchyPriors()
        )

    rng = np.random.default_rng(abc_config.seed)
    t0 = time.perf_counter()
    n = constraint.n
    target = _constraint_targets(constraint)
    n_sims = abc_config.n_sims

    if fam_name == "gaussian":
        names = ("mu", "sigma2")
        sigma2 = priors.beta / rng.gamma(priors.alpha, size=n_sims)
        mu = rng.normal(priors.mu0, np.sqrt(sigma2 / priors.nu))
        thetas = np.column_stack([mu, sigma2])

        def simulate(t, size):
            return rng.normal(t[0], math.sqrt(t[1]), size)

    else:
        names = ("x0", "gamma")
        x0 = priors.location.center + priors.location.scale * rng.standard_cauchy(n_sims)
        gam = rng.gamma(priors.scale.shape, 1.0 / priors.scale.rate, size=n_sims)
        thetas = np.column_stack([x0, gam])

        def simulate(t, size):
            return t[0] + t[1] * rng.standard_cauchy(size)

    summaries = np.empty((n_sims, len(target)))
    for t in range(n_sims):
        x = simulate(thetas[t], n)
        summaries[t] = _constraint_summaries(constraint, x)

    spread = summaries.std(axis=0)
    spread[spread == 0] = 1.0
    dist = np.sqrt((((summaries - target) / spread) ** 2).sum(axis=1))
    order = np.argsort(dist, kind="stable")[: abc_config.keep]
    return AbcOutput(
        draws=thetas[order],
        param_names=names,
        distances=dist[order],
        standardization=spread,
        seed=abc_config.seed,
        n_sims=n_sims,
        wall_clock=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def effective_sample_size(draws, component: int | str = 0, param_names=None) -> float:
    """Autocorrelation-sum ESS with Geyer's initial positive sequence cutoff.

    Requires at least 100 draws; returns a value in [1, n].
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 2:
        if isinstance(component, str):
            if param_names is None:
                raise DiagnosticsError("component given by name but param_names missing")
            component = list(param_names).index(component)
        series = draws[:, component]
    else:
        series = draws
    n = series.size
    if n < 100:
        raise DiagnosticsError(f"need at least 100 draws for an ESS estimate, got {n}")
    centered = series - series.mean()
    var = float(np.dot(centered, centered)) / n
    if var == 0.0:
        return 1.0
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centered, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n].real / n
    rho = acov / acov[0]
    # sum initial positive pairs rho[2t-1] + rho[2t]
    ess_denom = 1.0
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        ess_denom += 2.0 * pair
        t += 2
    ess = n / ess_denom
    return float(min(max(ess, 1.0), n))


def summarize(draws: np.ndarray, param_names) -> dict:
    """Posterior mean/sd/quantile summary used by the CLI outputs."""
    out = {}
    for t, nm in enumerate(param_names):
        col = draws[:, t]
        entry = {
            "mean": float(col.mean()),
            "sd": float(col.std(ddof=1)) if col.size > 1 else 0.0,
            "q2.5": float(np.percentile(col, 2.5)),
            "q50": float(np.percentile(col, 50)),
            "q97.5": float(np.percentile(col, 97.5)),
        }
        if col.size >= 100:
            entry["ess"] = effective_sample_size(col)
        out[nm] = entry
    return out
