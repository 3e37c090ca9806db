"""Continuous univariate families with exact interval-truncated sampling.

Three families are provided: Gaussian, Cauchy and the translated (three
parameter) Weibull.  Each exposes pdf/cdf/quantile evaluation, unconstrained
sampling and truncated sampling, in both vectorized (numpy) and scalar fast
paths.  The scalar paths (``cdf1``, ``ppf1``, ...) exist because the pairwise
resampling kernels call them millions of times on single values.

Truncated sampling uses the inverse CDF restricted to [F(lo), F(hi)].  When
both endpoints sit in the upper tail the computation switches to survival
space (inverse survival on [S(hi), S(lo)]) so that deep-tail intervals do not
suffer catastrophic cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InfeasibleIntervalError, ParameterError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)

# Draws from a truncated interval must land strictly inside it.  Collisions
# with an endpoint (possible when the interval mass underflows) are redrawn
# this many times before falling back to a uniform draw on the interval,
# which is the correct limit law for vanishingly thin intervals.
_MAX_REDRAW = 64


@dataclass(frozen=True)
class Interval:
    """An open interval with extended-real endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"interval requires lo < hi, got ({self.lo}, {self.hi})")

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi


class Family:
    """Shared truncated-sampling machinery for the concrete families.

    Subclasses implement the scalar primitives ``cdf1``/``sf1``/``ppf1``/
    ``isf1``/``logpdf1``, their vectorized counterparts, and ``sample``.
    """

    param_names: tuple[str, ...] = ()
    support_lo: float = -math.inf
    support_hi: float = math.inf

    # -- scalar primitives (overridden) -------------------------------------
    def cdf1(self, x: float) -> float:
        raise NotImplementedError

    def sf1(self, x: float) -> float:
        raise NotImplementedError

    def ppf1(self, p: float) -> float:
        raise NotImplementedError

    def isf1(self, s: float) -> float:
        raise NotImplementedError

    def logpdf1(self, x: float) -> float:
        raise NotImplementedError

    def pdf1(self, x: float) -> float:
        lp = self.logpdf1(x)
        return math.exp(lp) if lp > -math.inf else 0.0

    # -- vectorized API ------------------------------------------------------
    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            out = np.exp(self.logpdf(x))
        return out

    def logpdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        raise NotImplementedError

    def ppf(self, p):
        raise NotImplementedError

    def isf(self, s):
        raise NotImplementedError

    def quantile(self, p: float) -> float:
        """Quantile function; raises for p outside (0, 1)."""
        if not 0.0 < p < 1.0:
            raise ParameterError(f"quantile probability must lie in (0,1), got {p}")
        return self.ppf1(p)

    def loglik(self, x) -> float:
        """Sum of log densities; -inf if any point falls outside the support."""
        lp = self.logpdf(np.asarray(x, dtype=float))
        if np.isneginf(lp).any():
            return -math.inf
        return float(lp.sum())

    def sample(self, rng, size=None):
        raise NotImplementedError

    # -- truncation ----------------------------------------------------------
    def interval_mass(self, lo: float, hi: float) -> float:
        """P(lo < X < hi), computed in the numerically favourable tail space."""
        lo = max(lo, self.support_lo)
        hi = min(hi, self.support_hi)
        if not lo < hi:
            return 0.0
        if self.cdf1(lo) >= 0.5:
            return max(self.sf1(lo) - self.sf1(hi), 0.0)
        return max(self.cdf1(hi) - self.cdf1(lo), 0.0)

    def truncation(self, lo: float, hi: float) -> "TruncatedSampler":
        return TruncatedSampler(self, lo, hi)

    def sample_truncated(self, iv: Interval | tuple, rng, size=None):
        """Draw from the family restricted to the open interval ``iv``.

        Raises InfeasibleIntervalError if the interval carries no mass.
        """
        lo, hi = (iv.lo, iv.hi) if isinstance(iv, Interval) else iv
        return self.truncation(lo, hi).draw(rng, size)

    def sample_truncated_union(self, intervals, rng) -> float:
        """Draw one value from the family restricted to a union of intervals.

        Components with zero mass are dropped; an all-zero union raises.
        """
        samplers = []
        masses = []
        for lo, hi in intervals:
            lo_c = max(lo, self.support_lo)
            hi_c = min(hi, self.support_hi)
            if not lo_c < hi_c:
                continue
            t = TruncatedSampler(self, lo_c, hi_c, allow_empty=True)
            if t.mass > 0.0:
                samplers.append(t)
                masses.append(t.mass)
        if not samplers:
            raise InfeasibleIntervalError(
                f"union of intervals {list(intervals)} carries zero probability mass"
            )
        total = sum(masses)
        u = rng.random() * total
        acc = 0.0
        for t, w in zip(samplers, masses):
            acc += w
            if u <= acc:
                return t.draw1(rng)
        return samplers[-1].draw1(rng)


class TruncatedSampler:
    """Inverse-CDF sampler for one family restricted to an open interval.

    Precomputes the CDF (or survival) parametrization once so repeated draws
    from the same zone cost a single uniform plus one quantile evaluation.
    """

    __slots__ = ("family", "lo", "hi", "mass", "_use_sf", "_base", "_width")

    def __init__(self, family: Family, lo: float, hi: float, allow_empty: bool = False):
        lo = max(lo, family.support_lo)
        hi = min(hi, family.support_hi)
        self.family = family
        self.lo = lo
        self.hi = hi
        if not lo < hi:
            self.mass = 0.0
            self._use_sf = False
            self._base = 0.0
            self._width = 0.0
            if not allow_empty:
                raise InfeasibleIntervalError(
                    f"interval ({lo}, {hi}) is empty after support clipping"
                )
            return
        c_lo = family.cdf1(lo)
        if c_lo >= 0.5:
            # upper tail: work with survival probabilities
            s_lo = family.sf1(lo)
            s_hi = family.sf1(hi)
            self._use_sf = True
            self._base = s_hi
            self._width = s_lo - s_hi
            self.mass = max(self._width, 0.0)
        else:
            c_hi = family.cdf1(hi)
            self._use_sf = False
            self._base = c_lo
            self._width = c_hi - c_lo
            self.mass = max(self._width, 0.0)
        if self.mass <= 0.0 and not allow_empty:
            raise InfeasibleIntervalError(
                f"interval ({lo}, {hi}) carries zero probability mass"
            )

    def draw1(self, rng) -> float:
        if self.mass <= 0.0:
            raise InfeasibleIntervalError(
                f"interval ({self.lo}, {self.hi}) carries zero probability mass"
            )
        fam = self.family
        for _ in range(_MAX_REDRAW):
            u = rng.random()
            if self._use_sf:
                x = fam.isf1(self._base + u * self._width)
            else:
                x = fam.ppf1(self._base + u * self._width)
            if self.lo < x < self.hi:
                return x
        # Interval so thin the inverse CDF rounds onto an endpoint; the
        # conditional law is uniform in that limit.
        if math.isfinite(self.lo) and math.isfinite(self.hi):
            return self.lo + rng.random() * (self.hi - self.lo)
        raise InfeasibleIntervalError(
            f"could not draw strictly inside ({self.lo}, {self.hi})"
        )

    def draw(self, rng, size=None):
        if size is None:
            return self.draw1(rng)
        if self.mass <= 0.0:
            if size == 0:
                return np.empty(0)
            raise InfeasibleIntervalError(
                f"interval ({self.lo}, {self.hi}) carries zero probability mass"
            )
        u = rng.random(size)
        fam = self.family
        if self._use_sf:
            x = np.atleast_1d(fam.isf(self._base + u * self._width))
        else:
            x = np.atleast_1d(fam.ppf(self._base + u * self._width))
        bad = ~((self.lo < x) & (x < self.hi))
        if bad.any():
            x[bad] = [self.draw1(rng) for _ in range(int(bad.sum()))]
        return x


@dataclass(frozen=True)
class Gaussian(Family):
    """Normal distribution parameterized by mean and variance."""

    mu: float
    sigma2: float

    param_names = ("mu", "sigma2")

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ParameterError(f"Gaussian requires finite mu and sigma2 > 0, got {self}")
        object.__setattr__(self, "_sigma", math.sqrt(self.sigma2))

    @property
    def sigma(self) -> float:
        return self._sigma

    def cdf1(self, x: float) -> float:
        if x == -math.inf:
            return 0.0
        if x == math.inf:
            return 1.0
        return 0.5 * math.erfc((self.mu - x) / (self.sigma * _SQRT2))

    def sf1(self, x: float) -> float:
        if x == -math.inf:
            return 1.0
        if x == math.inf:
            return 0.0
        return 0.5 * math.erfc((x - self.mu) / (self.sigma * _SQRT2))

    def ppf1(self, p: float) -> float:
        return self.mu + self.sigma * float(special.ndtri(p))

    def isf1(self, s: float) -> float:
        return self.mu - self.sigma * float(special.ndtri(s))

    def logpdf1(self, x: float) -> float:
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - _LOG_SQRT_2PI

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - _LOG_SQRT_2PI

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return special.ndtr(z)

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return special.ndtr(-z)

    def ppf(self, p):
        return self.mu + self.sigma * special.ndtri(np.asarray(p, dtype=float))

    def isf(self, s):
        return self.mu - self.sigma * special.ndtri(np.asarray(s, dtype=float))

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class Cauchy(Family):
    """Cauchy distribution with location x0 and scale gamma.

    The scale equals the theoretical MAD and half the theoretical IQR.
    """

    x0: float
    gamma: float

    param_names = ("x0", "gamma")

    def __post_init__(self):
        if not (np.isfinite(self.x0) and np.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterError(f"Cauchy requires finite x0 and gamma > 0, got {self}")

    def cdf1(self, x: float) -> float:
        if x == -math.inf:
            return 0.0
        if x == math.inf:
            return 1.0
        z = (x - self.x0) / self.gamma
        # tail-stable branches: atan(z)+pi/2 cancels for z << 0
        if z < -1.0:
            return math.atan(-1.0 / z) / math.pi
        if z > 1.0:
            return 1.0 - math.atan(1.0 / z) / math.pi
        return 0.5 + math.atan(z) / math.pi

    def sf1(self, x: float) -> float:
        return self.cdf1(2.0 * self.x0 - x)

    def ppf1(self, p: float) -> float:
        if p < 0.25:
            return self.x0 - self.gamma / math.tan(math.pi * p)
        if p > 0.75:
            return self.x0 + self.gamma / math.tan(math.pi * (1.0 - p))
        return self.x0 + self.gamma * math.tan(math.pi * (p - 0.5))

    def isf1(self, s: float) -> float:
        return 2.0 * self.x0 - self.ppf1(s)

    def logpdf1(self, x: float) -> float:
        z = (x - self.x0) / self.gamma
        return -math.log(math.pi * self.gamma) - math.log1p(z * z)

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.x0) / self.gamma
        return -math.log(math.pi * self.gamma) - np.log1p(z * z)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        z = np.atleast_1d((x - self.x0) / self.gamma)
        out = np.empty_like(z)
        lo = z < -1.0
        hi = z > 1.0
        mid = ~(lo | hi)
        with np.errstate(divide="ignore"):
            out[lo] = np.arctan(-1.0 / z[lo]) / np.pi
            out[hi] = 1.0 - np.arctan(1.0 / z[hi]) / np.pi
        out[mid] = 0.5 + np.arctan(z[mid]) / np.pi
        return out.reshape(x.shape)

    def sf(self, x):
        return self.cdf(2.0 * self.x0 - np.asarray(x, dtype=float))

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        q = np.atleast_1d(p)
        out = np.empty_like(q)
        lo = q < 0.25
        hi = q > 0.75
        mid = ~(lo | hi)
        out[lo] = self.x0 - self.gamma / np.tan(np.pi * q[lo])
        out[hi] = self.x0 + self.gamma / np.tan(np.pi * (1.0 - q[hi]))
        out[mid] = self.x0 + self.gamma * np.tan(np.pi * (q[mid] - 0.5))
        return out.reshape(p.shape)

    def isf(self, s):
        return 2.0 * self.x0 - self.ppf(s)

    def sample(self, rng, size=None):
        return self.x0 + self.gamma * rng.standard_cauchy(size)


@dataclass(frozen=True)
class TranslatedWeibull(Family):
    """Three-parameter Weibull: location x0, scale gamma, shape beta.

    Support is [x0, inf); the density is exactly zero below x0.
    """

    x0: float
    gamma: float
    beta: float

    param_names = ("x0", "gamma", "beta")

    def __post_init__(self):
        ok = (
            np.isfinite(self.x0)
            and np.isfinite(self.gamma)
            and np.isfinite(self.beta)
            and self.gamma > 0
            and self.beta > 0
        )
        if not ok:
            raise ParameterError(
                f"TranslatedWeibull requires gamma > 0 and beta > 0, got {self}"
            )
        object.__setattr__(self, "support_lo", self.x0)

    def cdf1(self, x: float) -> float:
        if x <= self.x0:
            return 0.0
        if x == math.inf:
            return 1.0
        t = (x - self.x0) / self.gamma
        return -math.expm1(-(t**self.beta))

    def sf1(self, x: float) -> float:
        if x <= self.x0:
            return 1.0
        if x == math.inf:
            return 0.0
        t = (x - self.x0) / self.gamma
        return math.exp(-(t**self.beta))

    def ppf1(self, p: float) -> float:
        return self.x0 + self.gamma * (-math.log1p(-p)) ** (1.0 / self.beta)

    def isf1(self, s: float) -> float:
        if s <= 0.0:
            return math.inf
        return self.x0 + self.gamma * (-math.log(s)) ** (1.0 / self.beta)

    def logpdf1(self, x: float) -> float:
        if x <= self.x0:
            return -math.inf
        t = (x - self.x0) / self.gamma
        return (
            math.log(self.beta / self.gamma)
            + (self.beta - 1.0) * math.log(t)
            - t**self.beta
        )

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        xv = np.atleast_1d(x)
        out = np.full(xv.shape, -np.inf)
        inside = xv > self.x0
        t = (xv[inside] - self.x0) / self.gamma
        with np.errstate(divide="ignore"):
            out[inside] = (
                math.log(self.beta / self.gamma)
                + (self.beta - 1.0) * np.log(t)
                - t**self.beta
            )
        return out.reshape(x.shape)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        t = np.clip((x - self.x0) / self.gamma, 0.0, None)
        return -np.expm1(-(t**self.beta))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        t = np.clip((x - self.x0) / self.gamma, 0.0, None)
        return np.exp(-(t**self.beta))

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        return self.x0 + self.gamma * (-np.log1p(-p)) ** (1.0 / self.beta)

    def isf(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            out = self.x0 + self.gamma * (-np.log(s)) ** (1.0 / self.beta)
        return out

    def sample(self, rng, size=None):
        return self.x0 + self.gamma * rng.weibull(self.beta, size)


FAMILY_NAMES = {
    "gaussian": Gaussian,
    "cauchy": Cauchy,
    "weibull3": TranslatedWeibull,
}


def make_family(name: str, *params: float) -> Family:
    """Build a family by CLI name ('gaussian', 'cauchy', 'weibull3')."""
    try:
        cls = FAMILY_NAMES[name]
    except KeyError:
        raise ParameterError(f"unknown family {name!r}; choose from {sorted(FAMILY_NAMES)}")
    return cls(*params)
